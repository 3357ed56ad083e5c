//! Python bindings for `qlga`: lattices, evolution operators, spectra,
//! spectral flow, gauge invariants and the detection experiments.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qlga::experiment::{self, DetectionConfig};
use qlga::spectral::{self, SpectralFlowResult};
use qlga::wavepacket::{self, Branch, PacketSpec};
use qlga::{gauge, FieldConfig, MassAngle, QlgaError, Topology, WaveFunction};

fn err(e: QlgaError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn topology(name: &str, zeta_left: f64, zeta_right: f64) -> PyResult<Topology> {
    match name {
        "periodic" => Ok(Topology::Periodic),
        "bounded" => Topology::bounded(zeta_left, zeta_right).map_err(err),
        other => Err(PyValueError::new_err(format!(
            "topology must be 'periodic' or 'bounded', got '{other}'"
        ))),
    }
}

fn fields(size: usize, phi: Option<Vec<f64>>, a: Option<Vec<f64>>) -> PyResult<FieldConfig> {
    FieldConfig::new(
        phi.unwrap_or_else(|| vec![0.0; size]),
        a.unwrap_or_else(|| vec![0.0; size]),
    )
    .map_err(err)
}

fn theta(value: f64) -> PyResult<MassAngle> {
    MassAngle::new(value).map_err(err)
}

#[pyclass(name = "Lattice", frozen)]
pub struct PyLattice {
    inner: qlga::Lattice,
}

#[pymethods]
impl PyLattice {
    #[new]
    #[pyo3(signature = (size, topology="periodic", zeta_left=0.0, zeta_right=0.0))]
    fn new(size: usize, topology: &str, zeta_left: f64, zeta_right: f64) -> PyResult<Self> {
        let t = self::topology(topology, zeta_left, zeta_right)?;
        Ok(Self {
            inner: qlga::Lattice::new(size, t).map_err(err)?,
        })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn topology(&self) -> &'static str {
        self.inner.topology().name()
    }

    fn is_periodic(&self) -> bool {
        self.inner.is_periodic()
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice(size={}, topology='{}')",
            self.inner.size(),
            self.inner.topology().name()
        )
    }
}

#[pyclass(name = "Spectrum", frozen)]
pub struct PySpectrum {
    inner: spectral::Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn eigenphases(&self) -> Vec<f64> {
        self.inner.eigenphases().to_vec()
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.inner.max_residual()
    }

    /// Column `j` of the eigenvector matrix.
    fn eigenvector(&self, j: usize) -> PyResult<Vec<Complex64>> {
        if j >= self.inner.len() {
            return Err(PyValueError::new_err(format!("index {j} out of range")));
        }
        Ok(self.inner.eigenvectors().column(j).iter().copied().collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "EvolutionOperator", frozen)]
pub struct PyEvolution {
    inner: qlga::EvolutionOperator,
}

#[pymethods]
impl PyEvolution {
    #[new]
    #[pyo3(signature = (lattice, theta, phi=None, a=None))]
    fn new(lattice: &PyLattice, theta: f64, phi: Option<Vec<f64>>, a: Option<Vec<f64>>) -> PyResult<Self> {
        let f = fields(lattice.inner.size(), phi, a)?;
        let inner = qlga::build_evolution(&lattice.inner, self::theta(theta)?, &f).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `max |U†U − I|`.
    fn unitarity_residual(&self) -> f64 {
        self.inner.check_unitarity()
    }

    /// Dense matrix as a list of rows.
    fn dense(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.dense();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    /// Applies `steps` time steps to an amplitude vector (layout `2x + c`,
    /// `c = 0` left-mover).
    #[pyo3(signature = (amplitudes, steps=1))]
    fn evolve(&self, amplitudes: Vec<Complex64>, steps: usize) -> PyResult<Vec<Complex64>> {
        let psi = WaveFunction::from_amplitudes(amplitudes).map_err(err)?;
        Ok(self.inner.evolve(&psi, steps).map_err(err)?.into_amplitudes())
    }

    fn spectrum(&self) -> PyResult<PySpectrum> {
        Ok(PySpectrum {
            inner: spectral::spectrum(&self.inner).map_err(err)?,
        })
    }
}

#[pyclass(name = "SpectralFlow", frozen)]
pub struct PySpectralFlow {
    inner: SpectralFlowResult,
}

#[pymethods]
impl PySpectralFlow {
    #[getter]
    fn delta(&self) -> Vec<f64> {
        self.inner.delta_grid.clone()
    }

    /// Tracked, unwrapped branches: `branches[b][i]` at `delta[i]`.
    #[getter]
    fn branches(&self) -> Vec<Vec<f64>> {
        self.inner.branches.clone()
    }

    #[getter]
    fn phases(&self) -> Vec<Vec<f64>> {
        self.inner.phases.clone()
    }

    fn flow_count(&self, level: f64) -> PyResult<usize> {
        spectral::flow_count(&self.inner, level).map_err(err)
    }
}

/// `(ω₊, ω₋)` of the homogeneous ring at wavenumber `k` and uniform potential `a`.
#[pyfunction]
#[pyo3(signature = (theta, k, a=0.0))]
fn dispersion(theta: f64, k: f64, a: f64) -> PyResult<(f64, f64)> {
    Ok(spectral::dispersion(self::theta(theta)?, k, a))
}

#[pyfunction]
#[pyo3(signature = (lattice, theta, n_delta=64))]
fn spectral_flow(lattice: &PyLattice, theta: f64, n_delta: usize) -> PyResult<PySpectralFlow> {
    Ok(PySpectralFlow {
        inner: spectral::spectral_flow(&lattice.inner, self::theta(theta)?, n_delta).map_err(err)?,
    })
}

/// Holonomy `δ ∈ [0, 2π)` of the vector potential around a ring.
#[pyfunction]
fn wilson_loop(lattice: &PyLattice, a: Vec<f64>) -> PyResult<f64> {
    let f = fields(lattice.inner.size(), None, Some(a))?;
    Ok(gauge::wilson_loop(&f, &lattice.inner).map_err(err)?.delta)
}

fn packet(size: usize, k0: f64, x0: Option<usize>, sigma: Option<f64>, plane_wave: bool) -> PyResult<PacketSpec> {
    if plane_wave {
        PacketSpec::plane_wave(k0, Branch::Positive).map_err(err)
    } else {
        PacketSpec::new(
            k0,
            x0.unwrap_or(size / 2),
            sigma.unwrap_or(size as f64 / 8.0),
            Branch::Positive,
        )
        .map_err(err)
    }
}

/// Frequency law `(support, probabilities)` of the standard packet under a
/// uniform vector potential.
#[pyfunction]
#[pyo3(signature = (lattice, theta, a_uniform, k0=std::f64::consts::FRAC_PI_2, x0=None, sigma=None, plane_wave=false))]
fn packet_distribution(
    lattice: &PyLattice,
    theta: f64,
    a_uniform: f64,
    k0: f64,
    x0: Option<usize>,
    sigma: Option<f64>,
    plane_wave: bool,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let n = lattice.inner.size();
    let th = self::theta(theta)?;
    let spec = packet(n, k0, x0, sigma, plane_wave)?;
    let psi = wavepacket::prepare_packet(&lattice.inner, th, &spec).map_err(err)?;
    let u = qlga::build_evolution(
        &lattice.inner,
        th,
        &FieldConfig::uniform_vector(n, a_uniform).map_err(err)?,
    )
    .map_err(err)?;
    let dist = wavepacket::frequency_distribution(&psi, &spectral::spectrum(&u).map_err(err)?).map_err(err)?;
    Ok((dist.support, dist.probabilities))
}

#[pyfunction]
#[pyo3(signature = (size, theta, a_uniform, seed, topology="periodic", k0=std::f64::consts::FRAC_PI_2, x0=None, sigma=None, n_samples=25, epsilon=0.05, plane_wave=false))]
#[allow(clippy::too_many_arguments)]
fn run_detection<'py>(
    py: Python<'py>,
    size: usize,
    theta: f64,
    a_uniform: f64,
    seed: u64,
    topology: &str,
    k0: f64,
    x0: Option<usize>,
    sigma: Option<f64>,
    n_samples: usize,
    epsilon: f64,
    plane_wave: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let config = DetectionConfig {
        lattice_size: size,
        theta: self::theta(theta)?,
        a_uniform,
        packet: packet(size, k0, x0, sigma, plane_wave)?,
        n_samples,
        epsilon,
        seed,
    };
    let r = experiment::run_detection(&config, self::topology(topology, 0.0, 0.0)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("decision", r.decision.name())?;
    d.set_item("sample_mean", r.sample_mean)?;
    d.set_item("baseline_mean", r.baseline_mean)?;
    d.set_item("threshold", r.threshold)?;
    d.set_item("samples_used", r.samples_used)?;
    d.set_item("ground_truth", r.ground_truth.name())?;
    d.set_item("correct", r.correct)?;
    Ok(d)
}

/// Steps until the classical particle reverses (`None` if the cutoff fired).
#[pyfunction]
#[pyo3(signature = (lattice, start, direction, cutoff=None))]
fn classical_baseline(
    lattice: &PyLattice,
    start: usize,
    direction: i8,
    cutoff: Option<usize>,
) -> PyResult<Option<usize>> {
    let cutoff = cutoff.unwrap_or_else(|| experiment::default_cutoff(&lattice.inner));
    Ok(experiment::classical_baseline(&lattice.inner, start, direction, cutoff)
        .map_err(err)?
        .steps_to_detect)
}

#[pyfunction]
fn required_samples(sigma_omega: f64, shift: f64, epsilon: f64) -> PyResult<usize> {
    experiment::required_samples(sigma_omega, shift, epsilon).map_err(err)
}

#[pymodule]
pub fn pyqlga(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyEvolution>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PySpectralFlow>()?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_flow, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_loop, m)?)?;
    m.add_function(wrap_pyfunction!(packet_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(run_detection, m)?)?;
    m.add_function(wrap_pyfunction!(classical_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(required_samples, m)?)?;
    Ok(())
}
