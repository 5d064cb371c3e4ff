//! Runs the Python smoke script against the module, registered in an
//! embedded interpreter.

use std::ffi::CString;
use std::path::PathBuf;

use pybundlelab::pybundlelab;
use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn python_smoke_script() {
    let script: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "python", "smoke_test.py"].iter().collect();
    let code = CString::new(std::fs::read_to_string(&script).unwrap()).unwrap();
    pyo3::append_to_inittab!(pybundlelab);
    Python::initialize();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("__name__", "smoke_test").unwrap();
        let result = py
            .run(code.as_c_str(), Some(&globals), None)
            .and_then(|_| globals.get_item("main")?.expect("script defines main").call0())
            .and_then(|_| py.import("sys")?.getattr("stdout")?.call_method0("flush"));
        if let Err(e) = result {
            e.display(py);
            panic!("smoke script failed: {e}");
        }
    });
}
