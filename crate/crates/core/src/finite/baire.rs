//! Baire category on finite spaces and its fiberwise form.
//!
//! Countable families collapse to finite ones here: a finite lattice has only
//! finitely many dense opens, and their intersection is itself a dense open.

use serde::Serialize;

use crate::bits::{bits, is_subset, submasks};
use crate::error::Result;

use super::{FiniteMap, FiniteSpace};

/// Outcome of an exhaustive verifier. `counterexample` is the first failure
/// in canonical (ascending) order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub check: String,
    pub cases: usize,
    pub counterexample: Option<serde_json::Value>,
}

impl VerifyReport {
    pub fn new(check: &str) -> Self {
        VerifyReport { check: check.to_string(), cases: 0, counterexample: None }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub(crate) fn expect(&mut self, ok: bool, detail: impl FnOnce() -> serde_json::Value) -> bool {
        self.cases += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(detail());
        }
        ok
    }
}

/// The topology of `space` restricted to the point-set `within`.
#[derive(Clone, Debug)]
pub struct Relative {
    within: u64,
    opens: Vec<u64>,
    core: u64,
}

impl Relative {
    pub fn new(space: &FiniteSpace, within: u64) -> Self {
        let mut opens: Vec<u64> = space.opens().iter().map(|&o| o & within).collect();
        opens.sort_unstable();
        opens.dedup();
        let nonempty: Vec<u64> = opens.iter().copied().filter(|&o| o != 0).collect();
        let core =
            opens.iter().copied().filter(|&d| nonempty.iter().all(|&o| o & d != 0)).fold(within, |acc, d| acc & d);
        Relative { within, opens, core }
    }

    pub fn opens(&self) -> &[u64] {
        &self.opens
    }

    pub fn is_open(&self, set: u64) -> bool {
        self.opens.binary_search(&(set & self.within)).is_ok()
    }

    /// Contains a (finite) intersection of dense opens.
    pub fn is_comeager(&self, set: u64) -> bool {
        is_subset(self.core, set)
    }

    pub fn is_meager(&self, set: u64) -> bool {
        self.is_comeager(self.within & !set)
    }

    /// `set = U △ M` with `U` open and `M` meager.
    pub fn is_baire_measurable(&self, set: u64) -> bool {
        let set = set & self.within;
        self.opens.iter().any(|&u| self.is_meager(set ^ u))
    }
}

pub fn is_comeager(space: &FiniteSpace, set: u64) -> bool {
    Relative::new(space, space.full()).is_comeager(set)
}

pub fn is_meager(space: &FiniteSpace, set: u64) -> bool {
    Relative::new(space, space.full()).is_meager(set)
}

pub fn is_baire_measurable(space: &FiniteSpace, set: u64) -> bool {
    Relative::new(space, space.full()).is_baire_measurable(set)
}

struct Fibers {
    rel: Vec<Relative>,
}

impl Fibers {
    fn new(f: &FiniteMap) -> Self {
        let rel = (0..f.target().len()).map(|y| Relative::new(f.source(), f.fiber(y))).collect();
        Fibers { rel }
    }

    fn exists(&self, set: u64) -> u64 {
        self.rel.iter().enumerate().filter(|(_, r)| !r.is_meager(set)).fold(0, |m, (y, _)| m | 1 << y)
    }

    fn forall(&self, set: u64) -> u64 {
        self.rel.iter().enumerate().filter(|(_, r)| r.is_comeager(set)).fold(0, |m, (y, _)| m | 1 << y)
    }

    fn fiberwise_open(&self, set: u64) -> bool {
        self.rel.iter().all(|r| r.is_open(set))
    }
}

/// `∃*_f(A)`: points whose fiber meets `A` non-meagerly.
pub fn cat_exists(f: &FiniteMap, set: u64) -> u64 {
    Fibers::new(f).exists(set)
}

/// `∀*_f(A)`: points whose fiber meets `A` comeagerly.
pub fn cat_forall(f: &FiniteMap, set: u64) -> u64 {
    Fibers::new(f).forall(set)
}

fn is_weak_basis(f: &FiniteMap, fib: &Fibers, family: &[u64], u: u64) -> bool {
    (0..f.target().len()).all(|y| {
        let r = &fib.rel[y];
        let fiber = f.fiber(y);
        r.opens()
            .iter()
            .filter(|&&v| v != 0 && is_subset(v, u))
            .all(|&v| family.iter().any(|&w| is_subset(w, u) && w & fiber != 0 && is_subset(w & fiber, v)))
    })
}

/// Exhaustively checks the three category-quantifier identities for a
/// continuous open map: `∃*(U) = f(U)` for fiberwise-open `U`; `∃*` commutes
/// with unions; and the weak-basis formula for `∃*(U ∖ A)` with three
/// weak-basis families (opens, minimal basis, all fiberwise opens).
pub fn verify_bairequant_identities(f: &FiniteMap) -> Result<VerifyReport> {
    f.require_open()?;
    let fib = Fibers::new(f);
    let src = f.source();
    let mut report = VerifyReport::new("bairequant");
    let all_sets: Vec<u64> = submasks(src.full()).collect();
    let fw_open: Vec<u64> = all_sets.iter().copied().filter(|&s| fib.fiberwise_open(s)).collect();

    for &u in &fw_open {
        let lhs = fib.exists(u);
        let rhs = f.image(u);
        if !report.expect(lhs == rhs, || serde_json::json!({"clause": "i", "U": u, "exists": lhs, "image": rhs})) {
            return Ok(report);
        }
    }
    for &a in &all_sets {
        for &b in &all_sets {
            let lhs = fib.exists(a | b);
            let rhs = fib.exists(a) | fib.exists(b);
            if !report
                .expect(lhs == rhs, || serde_json::json!({"clause": "ii", "A0": a, "A1": b, "lhs": lhs, "rhs": rhs}))
            {
                return Ok(report);
            }
        }
    }
    let families: [(&str, Vec<u64>); 3] =
        [("opens", src.opens().to_vec()), ("minimal_basis", src.minimal_basis()), ("fiberwise_opens", fw_open.clone())];
    for &u in &fw_open {
        for (name, family) in &families {
            if !is_weak_basis(f, &fib, family, u) {
                continue;
            }
            for &a in &all_sets {
                let lhs = fib.exists(u & !a);
                let rhs =
                    family.iter().filter(|&&w| is_subset(w, u)).fold(0, |m, &w| m | (f.image(w) & !fib.exists(w & a)));
                if !report.expect(
                    lhs == rhs,
                    || serde_json::json!({"clause": "iii", "family": name, "U": u, "A": a, "lhs": lhs, "rhs": rhs}),
                ) {
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Exhaustive Kuratowski–Ulam check over every Baire-measurable `A`.
pub fn verify_kuratowski_ulam(f: &FiniteMap) -> Result<VerifyReport> {
    f.require_open()?;
    let fib = Fibers::new(f);
    let src = Relative::new(f.source(), f.source().full());
    let tgt = Relative::new(f.target(), f.target().full());
    let mut report = VerifyReport::new("kuratowski_ulam");
    for a in submasks(f.source().full()) {
        if !src.is_baire_measurable(a) {
            continue;
        }
        let good =
            fib.rel.iter().enumerate().filter(|(_, r)| r.is_baire_measurable(a)).fold(0u64, |m, (y, _)| m | 1 << y);
        let ex = fib.exists(a);
        let fa = fib.forall(a);
        let checks = [
            ("i", tgt.is_comeager(good)),
            ("ii_exists", tgt.is_baire_measurable(ex)),
            ("ii_forall", tgt.is_baire_measurable(fa)),
            ("iii_meager", tgt.is_meager(ex) == src.is_meager(a)),
            ("iii_comeager", tgt.is_comeager(fa) == src.is_comeager(a)),
        ];
        for (clause, ok) in checks {
            if !report.expect(ok, || serde_json::json!({"clause": clause, "A": a, "exists": ex, "forall": fa})) {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Points of `set` listed by label, for reports.
pub fn describe(space: &FiniteSpace, set: u64) -> Vec<String> {
    bits(set).map(|x| space.label(x).to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn sierpinski_category() {
        let s = FiniteSpace::sierpinski();
        assert!(is_comeager(&s, 0b11));
        assert!(is_comeager(&s, 0b10));
        assert!(is_meager(&s, 0b01));
        assert!(!is_meager(&s, 0b10));
        for a in 0..4 {
            assert!(is_baire_measurable(&s, a));
        }
    }

    #[test]
    fn quantifiers_on_projection() {
        let s = FiniteSpace::sierpinski();
        let p = FiniteMap::projection(&s, &s, 0).unwrap();
        // product points: (0,0)=0 (0,1)=1 (1,0)=2 (1,1)=3
        assert_eq!(cat_exists(&p, 0b1000), 0b10);
        assert_eq!(cat_exists(&p, p.source().full()), 0b11);
        assert_eq!(cat_exists(&p, 0), 0);
        assert_eq!(cat_forall(&p, 0), 0);
        for a in submasks(p.source().full()) {
            let not_a = p.source().full() & !a;
            assert_eq!(cat_forall(&p, a), p.target().full() & !cat_exists(&p, not_a));
        }
    }

    #[test]
    fn verifiers_pass_on_identity_and_projection() {
        let s = FiniteSpace::sierpinski();
        let id = FiniteMap::identity(&FiniteSpace::chain(3));
        assert!(verify_bairequant_identities(&id).unwrap().passed());
        assert!(verify_kuratowski_ulam(&id).unwrap().passed());
        let p = FiniteMap::projection(&s, &s, 1).unwrap();
        assert!(verify_bairequant_identities(&p).unwrap().passed());
        let ku = verify_kuratowski_ulam(&p).unwrap();
        assert!(ku.passed());
        assert!(ku.cases > 0);
        // A = {(0,0)} is meager in S×S, and so is its ∃*.
        assert!(is_meager(p.source(), 0b0001));
        assert!(is_meager(&s, cat_exists(&p, 0b0001)));
    }

    #[test]
    fn non_open_map_rejected() {
        let s = FiniteSpace::sierpinski();
        let f = FiniteMap::new(s.clone(), s, vec![0, 0]).unwrap();
        assert_eq!(verify_bairequant_identities(&f).unwrap_err(), Error::NotOpenMap);
        assert_eq!(verify_kuratowski_ulam(&f).unwrap_err(), Error::NotOpenMap);
    }
}
