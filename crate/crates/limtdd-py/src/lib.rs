use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use limtdd::circuit::{generator, Angle, GateKind};
use limtdd::dense::Matrix;
use limtdd::{xp, Circuit, DenseTensor, LimTdd, Manager, StabMode};
use num_complex::Complex64;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &Matrix) -> Vec<Vec<Complex64>> {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect()).collect()
}

/// An XP operator `ω^p X^x P^z` at precision `n`.
#[pyclass(name = "XPOperator", unsendable, from_py_object)]
#[derive(Clone)]
struct PyXp(xp::XPOperator);

#[pymethods]
impl PyXp {
    #[new]
    fn new(n: u32, p: i64, x: Vec<u8>, z: Vec<i64>) -> PyResult<Self> {
        xp::XPOperator::new(n, p, &x, &z).map(PyXp).map_err(err)
    }

    #[staticmethod]
    fn identity(n: u32, rank: usize) -> Self {
        PyXp(xp::XPOperator::identity(n, rank))
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.0.precision()
    }

    #[getter]
    fn phase(&self) -> u32 {
        self.0.phase()
    }

    #[getter]
    fn x(&self) -> Vec<u8> {
        self.0.x().to_vec()
    }

    #[getter]
    fn z(&self) -> Vec<u32> {
        self.0.z().to_vec()
    }

    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn inverse(&self) -> Self {
        PyXp(self.0.inverse())
    }

    fn transpose(&self) -> Self {
        PyXp(self.0.transpose())
    }

    fn to_dense(&self) -> PyResult<Vec<Vec<Complex64>>> {
        self.0.to_dense().map(|m| rows(&m)).map_err(err)
    }

    fn __mul__(&self, o: &PyXp) -> PyResult<Self> {
        self.0.mul(&o.0).map(PyXp).map_err(err)
    }

    fn __eq__(&self, o: &PyXp) -> bool {
        self.0 == o.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        self.0.to_string()
    }
}

/// A scalar times an XP operator.
#[pyclass(name = "LimWeight", unsendable, from_py_object)]
#[derive(Clone)]
struct PyWeight(xp::LimWeight);

#[pymethods]
impl PyWeight {
    #[new]
    fn new(c: Complex64, op: &PyXp) -> Self {
        PyWeight(xp::LimWeight::new(c, op.0.clone()))
    }

    #[getter]
    fn coefficient(&self) -> Complex64 {
        self.0.coefficient()
    }

    #[getter]
    fn op(&self) -> PyXp {
        PyXp(self.0.op().clone())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.inverse().map(PyWeight).map_err(err)
    }

    fn to_dense(&self) -> PyResult<Vec<Vec<Complex64>>> {
        self.0.to_dense().map(|m| rows(&m)).map_err(err)
    }

    fn __mul__(&self, o: &PyWeight) -> PyResult<Self> {
        self.0.mul(&o.0).map(PyWeight).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        self.0.to_string()
    }
}

/// A quantum circuit over `n` qubits.
#[pyclass(name = "Circuit", unsendable, from_py_object)]
#[derive(Clone)]
struct PyCircuit(Circuit);

fn gate_kind(name: &str, angle: Option<(i64, u32)>) -> PyResult<GateKind> {
    let phase = || -> PyResult<Angle> {
        let (num, den) = angle.ok_or_else(|| PyValueError::new_err(format!("gate `{name}` needs an angle")))?;
        Angle::new(num, den).ok_or_else(|| PyValueError::new_err("angle denominator must be a power of two"))
    };
    Ok(match name {
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "h" => GateKind::H,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "t" => GateKind::T,
        "tdg" => GateKind::Tdg,
        "p" => GateKind::P(phase()?),
        "cx" => GateKind::CX,
        "cy" => GateKind::CY,
        "cz" => GateKind::CZ,
        "cp" => GateKind::CP(phase()?),
        "swap" => GateKind::Swap,
        _ => return Err(PyValueError::new_err(format!("unknown gate `{name}`"))),
    })
}

#[pymethods]
impl PyCircuit {
    #[new]
    fn new(n: usize) -> Self {
        PyCircuit(Circuit::new(n))
    }

    #[staticmethod]
    fn from_qasm(text: &str) -> PyResult<Self> {
        limtdd::parse_qasm(text).map(PyCircuit).map_err(err)
    }

    /// Named family: ghz, qft, fig9, remark2, sample or cliffordt.
    #[staticmethod]
    #[pyo3(signature = (name, n, gates=0, t_prob=0.5, seed=0))]
    fn generator(name: &str, n: usize, gates: usize, t_prob: f64, seed: u64) -> PyResult<Self> {
        generator(name, n, gates, t_prob, seed).map(PyCircuit).map_err(err)
    }

    /// Appends a gate; `angle=(k, d)` means `kπ/d` for `p` and `cp`.
    #[pyo3(signature = (name, qubits, angle=None))]
    fn push(&mut self, name: &str, qubits: Vec<usize>, angle: Option<(i64, u32)>) -> PyResult<()> {
        let kind = gate_kind(name, angle)?;
        self.0.push(kind, &qubits).map_err(err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    fn to_qasm(&self) -> String {
        self.0.to_qasm()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

type Shared = Rc<RefCell<Manager>>;

/// Owner of the unique table, caches and index order.
#[pyclass(name = "Manager", unsendable)]
struct PyManager(Shared);

/// A diagram handle tied to the manager that built it.
#[pyclass(name = "Diagram", unsendable)]
struct PyDiagram {
    mgr: Shared,
    dd: LimTdd,
}

impl PyDiagram {
    fn wrap(&self, dd: LimTdd) -> PyDiagram {
        PyDiagram { mgr: self.mgr.clone(), dd }
    }

    fn same_manager(&self, o: &PyDiagram) -> PyResult<()> {
        if Rc::ptr_eq(&self.mgr, &o.mgr) {
            Ok(())
        } else {
            Err(PyValueError::new_err("diagrams belong to different managers"))
        }
    }
}

#[pymethods]
impl PyManager {
    /// `precision=0` gives plain tdd behaviour; `mode` is "fast" or "full".
    #[new]
    #[pyo3(signature = (precision=0, mode="fast"))]
    fn new(precision: u32, mode: &str) -> PyResult<Self> {
        let mode = match mode {
            "fast" => StabMode::Fast,
            "full" => StabMode::Full,
            _ => return Err(PyValueError::new_err(format!("unknown mode `{mode}`"))),
        };
        let m = Manager::new(precision, mode).map_err(err)?;
        Ok(PyManager(Rc::new(RefCell::new(m))))
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.0.borrow().precision()
    }

    fn register_index(&self, name: &str) -> u32 {
        self.0.borrow_mut().register_index(name) as u32
    }

    /// Builds a diagram from row-major data, first index most significant.
    fn generate(&self, indices: Vec<String>, data: Vec<Complex64>) -> PyResult<PyDiagram> {
        let t = DenseTensor::new(indices, data).map_err(err)?;
        let dd = self.0.borrow_mut().generate_registering(&t).map_err(err)?;
        Ok(PyDiagram { mgr: self.0.clone(), dd })
    }

    fn constant(&self, c: Complex64) -> PyDiagram {
        let dd = self.0.borrow_mut().constant(c);
        PyDiagram { mgr: self.0.clone(), dd }
    }

    /// Output state of `circuit` on the basis input `input`; returns (diagram, peak nodes).
    fn simulate(&self, circuit: &PyCircuit, input: &str) -> PyResult<(PyDiagram, usize)> {
        let out = limtdd::simulate(&circuit.0, input, &mut self.0.borrow_mut()).map_err(err)?;
        Ok((PyDiagram { mgr: self.0.clone(), dd: out.diagram }, out.peak_nodes))
    }

    /// Functionality of `circuit`; returns (diagram, peak nodes).
    fn functionality(&self, circuit: &PyCircuit) -> PyResult<(PyDiagram, usize)> {
        let out = limtdd::functionality(&circuit.0, &mut self.0.borrow_mut()).map_err(err)?;
        Ok((PyDiagram { mgr: self.0.clone(), dd: out.diagram }, out.peak_nodes))
    }

    fn live_nodes(&self) -> usize {
        self.0.borrow().live_nodes()
    }

    fn clear_caches(&self) {
        self.0.borrow_mut().clear_caches();
    }
}

#[pymethods]
impl PyDiagram {
    fn size(&self) -> usize {
        self.mgr.borrow().size(&self.dd)
    }

    fn indices(&self) -> Vec<String> {
        self.mgr.borrow().index_names(&self.dd)
    }

    fn is_zero(&self) -> bool {
        self.dd.is_zero()
    }

    /// Weight on the incoming edge.
    fn weight(&self) -> PyWeight {
        PyWeight(self.mgr.borrow().weight(&self.dd))
    }

    /// Dense form as (indices, data).
    fn to_tensor(&self) -> PyResult<(Vec<String>, Vec<Complex64>)> {
        let t = self.mgr.borrow().to_tensor(&self.dd).map_err(err)?;
        Ok((t.indices().to_vec(), t.data().to_vec()))
    }

    fn amplitude(&self, assignment: HashMap<String, u8>) -> PyResult<Complex64> {
        let a: Vec<(&str, u8)> = assignment.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        self.mgr.borrow().amplitude(&self.dd, &a).map_err(|e| PyKeyError::new_err(e.to_string()))
    }

    fn slice(&self, index: &str, value: u8) -> PyResult<PyDiagram> {
        let dd = self.mgr.borrow_mut().slicing(&self.dd, index, value).map_err(err)?;
        Ok(self.wrap(dd))
    }

    fn contract(&self, o: &PyDiagram, indices: Vec<String>) -> PyResult<PyDiagram> {
        self.same_manager(o)?;
        let names: Vec<&str> = indices.iter().map(String::as_str).collect();
        let dd = self.mgr.borrow_mut().contract(&self.dd, &o.dd, &names).map_err(err)?;
        Ok(self.wrap(dd))
    }

    /// Stabilizer group elements of the root node.
    fn stabilizer(&self) -> PyResult<Vec<PyXp>> {
        let g = self.mgr.borrow_mut().stab_root(&self.dd).map_err(err)?;
        Ok(g.elements().into_iter().map(PyXp).collect())
    }

    fn to_dot(&self) -> PyResult<String> {
        self.mgr.borrow().export_dot(&self.dd).map_err(err)
    }

    fn same_root(&self, o: &PyDiagram) -> bool {
        Rc::ptr_eq(&self.mgr, &o.mgr) && self.dd.root() == o.dd.root()
    }

    fn __add__(&self, o: &PyDiagram) -> PyResult<PyDiagram> {
        self.same_manager(o)?;
        let dd = self.mgr.borrow_mut().add(&self.dd, &o.dd).map_err(err)?;
        Ok(self.wrap(dd))
    }
}

#[pymodule]
fn limtdd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyXp>()?;
    m.add_class::<PyWeight>()?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyManager>()?;
    m.add_class::<PyDiagram>()?;
    Ok(())
}
