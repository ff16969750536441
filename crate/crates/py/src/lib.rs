//! Python bindings. Structured inputs and outputs are JSON strings in the
//! same formats the command-line tool reads and writes.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qpolis::bits::bits;
use qpolis::convert::{convert as convert_text, Format};
use qpolis::copres::reals::reals_dedekind;
use qpolis::finite::json::{map_from_json, space_from_json, space_to_json};
use qpolis::finite::{is_baire_measurable as baire_measurable, lower_powerspace as lower, FiniteMap, FiniteSpace};
use qpolis::game::{build_strategy, parse_strategy, play, player_one, winner_convergent, winner_strong};
use qpolis::points::{check_relations, named_real, rational_stream, separation_fuel, PointStream};
use qpolis::posite::{default_budget, generic_prime_filter, posite_from_json, Posite};
use qpolis::powerspace::{essential_check_via_powerspace, open_surj_embedding, powerspace};
use qpolis::rational::parse_q;
use qpolis::verify::{run_suite as run, SuiteParams};

create_exception!(qpolis_py, QpolisError, PyValueError);

fn err(e: qpolis::Error) -> PyErr {
    QpolisError::new_err(e.to_string())
}

fn space(text: &str) -> PyResult<FiniteSpace> {
    space_from_json(text).map_err(err)
}

fn map(text: &str, space_text: Option<&str>) -> PyResult<FiniteMap> {
    let ambient = space_text.map(space).transpose()?;
    map_from_json(text, ambient.as_ref()).map_err(err)
}

fn posite(text: &str) -> PyResult<Posite> {
    posite_from_json(text).map_err(err)
}

fn subset(x: &FiniteSpace, labels: &[String]) -> PyResult<u64> {
    labels.iter().try_fold(0u64, |m, l| {
        x.index_of(l).map(|i| m | 1 << i).ok_or_else(|| QpolisError::new_err(format!("unknown point {l:?}")))
    })
}

fn element(p: &Posite, l: &str) -> PyResult<usize> {
    p.labels().iter().position(|x| x == l).ok_or_else(|| QpolisError::new_err(format!("unknown element {l:?}")))
}

fn names(p: &Posite, set: u64) -> Vec<String> {
    bits(set).map(|u| p.labels()[u].clone()).collect()
}

/// Converts between `finite-space`, `copresentation` and `posite` JSON.
#[pyfunction]
fn convert(text: &str, from_format: &str, to_format: &str) -> PyResult<String> {
    let from: Format = from_format.parse().map_err(err)?;
    let to: Format = to_format.parse().map_err(err)?;
    convert_text(text, from, to).map_err(err)
}

/// Each irreducible closed set (as labels) with its generic point.
#[pyfunction]
fn sober_witness(space_json: &str) -> PyResult<Vec<(Vec<String>, String)>> {
    let x = space(space_json)?;
    let w = x.sober_witness().map_err(err)?;
    Ok(w.iter().map(|&(f, p)| (bits(f).map(|q| x.label(q).to_string()).collect(), x.label(p).to_string())).collect())
}

/// Pairs `(x, y)` with `x` in the closure of `y`.
#[pyfunction]
fn specialization(space_json: &str) -> PyResult<Vec<(String, String)>> {
    let x = space(space_json)?;
    Ok(x.specialization().iter().map(|&(p, q)| (x.label(p).to_string(), x.label(q).to_string())).collect())
}

#[pyfunction]
fn is_baire_measurable(space_json: &str, points: Vec<String>) -> PyResult<bool> {
    let x = space(space_json)?;
    let s = subset(&x, &points)?;
    Ok(baire_measurable(&x, s))
}

/// The lower powerspace as a finite space.
#[pyfunction]
fn lower_powerspace(space_json: &str) -> PyResult<String> {
    Ok(space_to_json(&lower(&space(space_json)?).map_err(err)?.space))
}

/// Closed sets agree with coideals of the basic posite.
#[pyfunction]
fn powerspace_check(space_json: &str) -> PyResult<bool> {
    let h = powerspace(&space(space_json)?).map_err(err)?;
    Ok(h.verify().map_err(err)?.passed())
}

#[pyfunction]
#[pyo3(signature = (map_json, space_json=None))]
fn open_surjection_check(map_json: &str, space_json: Option<&str>) -> PyResult<bool> {
    Ok(open_surj_embedding(&map(map_json, space_json)?).map_err(err)?.passed())
}

#[pyfunction]
#[pyo3(signature = (map_json, space_json=None))]
fn is_essential(map_json: &str, space_json: Option<&str>) -> PyResult<bool> {
    let r = essential_check_via_powerspace(&map(map_json, space_json)?).map_err(err)?;
    Ok(r.agree() && r.direct)
}

#[pyfunction]
fn posite_axioms(posite_json: &str) -> PyResult<bool> {
    Ok(posite(posite_json)?.check_axioms().passed())
}

#[pyfunction]
fn prime_filters(posite_json: &str) -> PyResult<Vec<Vec<String>>> {
    let p = posite(posite_json)?;
    Ok(p.prime_filters_brute().map_err(err)?.iter().map(|&f| names(&p, f)).collect())
}

/// A prime filter through `w` inside `coideal` (all elements by default).
#[pyfunction]
#[pyo3(signature = (posite_json, w, coideal=None, budget=None))]
fn generic_filter(
    posite_json: &str,
    w: &str,
    coideal: Option<Vec<String>>,
    budget: Option<u64>,
) -> PyResult<Vec<String>> {
    let p = posite(posite_json)?;
    let a = match coideal {
        None => p.full(),
        Some(ls) => ls.iter().try_fold(0u64, |m, l| element(&p, l).map(|u| m | 1 << u))?,
    };
    if !p.is_coideal(a) {
        return Err(QpolisError::new_err(format!("{:?} is not a coideal", names(&p, a))));
    }
    let w = element(&p, w)?;
    let g =
        generic_prime_filter(&p, &|u| a >> u & 1 == 1, w, budget.unwrap_or_else(|| default_budget(&p))).map_err(err)?;
    Ok(names(&p, g.filter))
}

/// Checks a named real or a rational against the Dedekind relations.
/// Returns the check report as JSON.
#[pyfunction]
#[pyo3(signature = (real, fuel=50))]
fn check_real(real: &str, fuel: u64) -> PyResult<String> {
    let stream: Box<dyn PointStream> = match named_real(real) {
        Some(s) => Box::new(s),
        None => Box::new(rational_stream(&parse_q(real).map_err(err)?)),
    };
    let rep = check_relations(stream.as_ref(), &reals_dedekind(), fuel);
    Ok(serde_json::to_string(&rep).expect("serializable"))
}

/// The simplest rational between two distinct rationals and the fuel by
/// which their streams differ.
#[pyfunction]
fn separate(a: &str, b: &str) -> PyResult<(String, u64)> {
    let (a, b) = (parse_q(a).map_err(err)?, parse_q(b).map_err(err)?);
    if a == b {
        return Err(QpolisError::new_err("equal rationals are not separated"));
    }
    let s = separation_fuel(&a, &b);
    Ok((s.pivot, s.fuel))
}

/// Plays a game and returns `(convergent verdict, strong verdict)`.
/// Strategy specs are those of `qpolis game play`.
#[pyfunction]
#[pyo3(signature = (space_json, ii="finite", i="random:0", rounds=None))]
fn play_game(space_json: &str, ii: &str, i: &str, rounds: Option<usize>) -> PyResult<(String, String)> {
    let x = space(space_json)?;
    let load = |p: &str| std::fs::read_to_string(p).map_err(|e| qpolis::Error::Schema(format!("{p}: {e}")));
    let spec = parse_strategy(ii, &load).map_err(err)?;
    let (y, mut sii) = build_strategy(&spec, &x).map_err(err)?;
    let mut si = player_one(i, &y).map_err(err)?;
    let h = play(&y, si.as_mut(), sii.as_mut(), rounds.unwrap_or(3 * y.len() + 4)).map_err(err)?;
    let name = |v| serde_json::to_value(v).expect("serializable").as_str().expect("unit variant").to_string();
    Ok((name(winner_convergent(&y, &h)), name(winner_strong(&y, &h))))
}

/// Runs a batch suite and returns its report as JSON.
#[pyfunction]
#[pyo3(signature = (name, seed=0, max_size=None, instances=None, fuel=None, rounds=None))]
fn run_suite(
    name: &str,
    seed: u64,
    max_size: Option<usize>,
    instances: Option<usize>,
    fuel: Option<u64>,
    rounds: Option<usize>,
) -> PyResult<String> {
    let params = SuiteParams { seed, max_size, instances, fuel, rounds };
    Ok(run(name, &params).map_err(err)?.to_json())
}

#[pymodule]
fn qpolis_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QpolisError", m.py().get_type::<QpolisError>())?;
    m.add_function(wrap_pyfunction!(convert, m)?)?;
    m.add_function(wrap_pyfunction!(sober_witness, m)?)?;
    m.add_function(wrap_pyfunction!(specialization, m)?)?;
    m.add_function(wrap_pyfunction!(is_baire_measurable, m)?)?;
    m.add_function(wrap_pyfunction!(lower_powerspace, m)?)?;
    m.add_function(wrap_pyfunction!(powerspace_check, m)?)?;
    m.add_function(wrap_pyfunction!(open_surjection_check, m)?)?;
    m.add_function(wrap_pyfunction!(is_essential, m)?)?;
    m.add_function(wrap_pyfunction!(posite_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(prime_filters, m)?)?;
    m.add_function(wrap_pyfunction!(generic_filter, m)?)?;
    m.add_function(wrap_pyfunction!(check_real, m)?)?;
    m.add_function(wrap_pyfunction!(separate, m)?)?;
    m.add_function(wrap_pyfunction!(play_game, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
