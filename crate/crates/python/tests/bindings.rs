use std::ffi::CString;

use pap::pap as pap_module;
use pyo3::prelude::*;

fn run(code: &str) -> PyResult<()> {
    pyo3::append_to_inittab!(pap_module);
    Python::initialize();
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        py.run(&code, None, None)
    })
}

#[test]
fn module_round_trip() {
    run(r#"
import pap
p = pap.Pap("ok :- p. ok :- q.", "p [1]. q [2].", "ok.")
cost, sols = p.solve_optimal(all=True)
assert cost == 1 and [s.hypotheses for s in sols] == [["p"]]
assert p.hypotheses() == [("p", 1), ("q", 2)]
assert p.is_relevant("p") and p.is_necessary("p") and not p.is_relevant("q")
assert p.is_optimal(["p"]) and not p.is_optimal(["q"])
assert p.admissible_witness(["q"]) == ["ok", "q"]
assert sorted(s.cost for s in p.enumerate_admissible()) == [1, 2, 3]
assert [s.cost for s in p.trace()][-1] == 1
assert "_sol" in p.translated_program()
assert pap.stable_models("a :- not b. b :- not a.") in ([["a"], ["b"]], [["b"], ["a"]])
try:
    p.is_relevant("zz")
    raise AssertionError("accepted a non-hypothesis")
except pap.InputError:
    pass
"#)
    .unwrap();
}
