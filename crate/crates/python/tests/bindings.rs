use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

/// Runs `code` with the extension module bound to the name `pyqlga`.
fn run(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(pyqlga::pyqlga)(py);
        let globals = PyDict::new(py);
        globals.set_item("pyqlga", module).unwrap();
        let source = CString::new(code).unwrap();
        if let Err(e) = py.run(&source, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn operator_and_spectrum() {
    run(r#"
import math
ring = pyqlga.Lattice(12)
assert ring.size == 12 and ring.dim == 24 and ring.topology == "periodic"
u = pyqlga.EvolutionOperator(ring, math.pi / 6, a=[0.05] * 12)
assert u.unitarity_residual() < 1e-12
s = u.spectrum()
assert len(s) == 24 and s.max_residual < 1e-9
phases = s.eigenphases
assert phases == sorted(phases)
v = s.eigenvector(0)
assert abs(sum(abs(z) ** 2 for z in v) - 1) < 1e-12
rows = u.dense()
assert len(rows) == 24 and len(rows[0]) == 24
"#);
}

#[test]
fn flow_and_invariants() {
    run(r#"
flow = pyqlga.spectral_flow(pyqlga.Lattice(8), 0.0, n_delta=17)
assert len(flow.branches) == 16 and len(flow.delta) == 17
assert flow.flow_count(0.3) == 2
bounded = pyqlga.spectral_flow(pyqlga.Lattice(8, "bounded"), 0.4, n_delta=9)
assert bounded.flow_count(0.3) == 0
assert abs(pyqlga.wilson_loop(pyqlga.Lattice(4), [0.5, 0.5, 0.5, 0.5]) - 2.0) < 1e-12
try:
    pyqlga.wilson_loop(pyqlga.Lattice(4, "bounded"), [0.0] * 4)
    raise AssertionError("expected ValueError")
except ValueError:
    pass
"#);
}

#[test]
fn experiments() {
    run(r#"
r = pyqlga.run_detection(16, 0.0, 0.2, seed=3, plane_wave=True, n_samples=1)
assert r["decision"] == "periodic" and r["correct"]
assert pyqlga.run_detection(32, 0.5, 0.2, seed=3) == pyqlga.run_detection(32, 0.5, 0.2, seed=3)
seg = pyqlga.Lattice(16, "bounded")
assert pyqlga.classical_baseline(seg, 0, 1) == 15
assert pyqlga.classical_baseline(pyqlga.Lattice(16), 4, -1) is None
assert pyqlga.required_samples(0.0, 0.2, 0.05) == 1
support, probs = pyqlga.packet_distribution(pyqlga.Lattice(32), 0.5, 0.2)
assert abs(sum(probs) - 1) < 1e-10 and len(support) == len(probs)
"#);
}
