//! The maximal-average statistic
//!
//! ```text
//! a_n(g) = |W_n|⁻¹ ∫ max_{t ∈ W_n} φ̂_t g dμ
//! ```
//!
//! over corner windows `W_n = [0, (n−1)𝟙]` or centered windows `J_n`, its
//! sweep over `n`, partial sums of the dual orbit, the dissipative limit
//! `∫ sup_s f(w, s) τ(dw)` of a translation model, and the heuristic
//! conservativity verdict built on them.
//!
//! For a conservative action `a_n → 0` for every integrable `g ≥ 0`; for a
//! dissipative one it converges to a positive limit whenever `g ≠ 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::action::{CubeWindow, GroupElement, NsAction, WindowKind};
use crate::error::{Error, Result};
use crate::hopf::KrengelForm;
use crate::measure::{integrate, Atom, L1Function};

/// Window elements handled per parallel task.
const CHUNK: usize = 256;

/// `s ↦ max_{t ∈ window} φ̂_t g(s)`, computed exactly on
/// `⋃_t φ_{−t}(supp g)`.
pub fn max_dual_function(action: &NsAction, g: &L1Function, window: CubeWindow) -> Result<L1Function> {
    if window.d != action.dim() {
        return Err(Error::Dimension {
            expected: action.dim(),
            got: window.d,
        });
    }
    let elements: Vec<GroupElement> = window.iter().collect();
    let support: Vec<&Atom> = g.support().collect();
    let maxima = elements
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<BTreeMap<Atom, f64>> {
            let mut local = BTreeMap::new();
            for t in chunk {
                let back = -t;
                for a in &support {
                    let s = action.apply(&back, a)?;
                    let (image, log_rn) = action.apply_with_log_rn(t, &s)?;
                    let v = g.get(&image) * log_rn.exp();
                    let slot = local.entry(s).or_insert(0.0f64);
                    *slot = slot.max(v);
                }
            }
            Ok(local)
        })
        .try_reduce(BTreeMap::new, |mut acc, other| {
            for (s, v) in other {
                let slot = acc.entry(s).or_insert(0.0f64);
                *slot = slot.max(v);
            }
            Ok(acc)
        })?;
    L1Function::new(action.space(), maxima)
}

/// One point of a [`StatSeries`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatRecord {
    pub n: usize,
    pub window: WindowKind,
    pub a_n: f64,
    /// Support size of the maximal function.
    pub support: usize,
    pub ms: f64,
}

/// `a_n` for a single `n`, with the support size and wall time.
pub fn stat_record(action: &NsAction, g: &L1Function, n: usize, kind: WindowKind) -> Result<StatRecord> {
    if n == 0 {
        return Err(Error::InvalidInput("window size n must be at least 1".into()));
    }
    let started = Instant::now();
    let window = CubeWindow::new(kind, n, action.dim());
    let max_fn = max_dual_function(action, g, window)?;
    let a_n = integrate(action.space(), &max_fn)? / window.len() as f64;
    Ok(StatRecord {
        n,
        window: kind,
        a_n,
        support: max_fn.support_len(),
        ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn stat_a_n(action: &NsAction, g: &L1Function, n: usize, kind: WindowKind) -> Result<f64> {
    Ok(stat_record(action, g, n, kind)?.a_n)
}

/// `a_n` over an increasing list of `n`.
#[derive(Clone, Debug, Serialize)]
pub struct StatSeries {
    pub records: Vec<StatRecord>,
    /// Certified `‖f − f_ε‖` when `g` came from a truncation; every `a_n`
    /// is then within `± truncation_error` of the untruncated statistic.
    pub truncation_error: f64,
}

impl StatSeries {
    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.a_n).collect()
    }

    pub fn with_truncation_error(mut self, eps: f64) -> Self {
        self.truncation_error = eps;
        self
    }

    /// CSV with header `n,window,a_n,support,ms`. With `timing` off the
    /// `ms` column is written as 0 so that output is reproducible.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from("n,window,a_n,support,ms\n");
        for r in &self.records {
            let ms = if timing {
                format!("{:.3}", r.ms)
            } else {
                "0".to_string()
            };
            out.push_str(&format!("{},{},{:?},{},{}\n", r.n, r.window, r.a_n, r.support, ms));
        }
        out
    }
}

fn check_increasing(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidInput("the list of n values is empty".into()));
    }
    if ns[0] == 0 {
        return Err(Error::InvalidInput("window size n must be at least 1".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!(
            "n values {ns:?} are not strictly increasing"
        )));
    }
    Ok(())
}

pub fn stat_series(action: &NsAction, g: &L1Function, ns: &[usize], kind: WindowKind) -> Result<StatSeries> {
    check_increasing(ns)?;
    let records = ns
        .iter()
        .map(|&n| stat_record(action, g, n, kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(StatSeries {
        records,
        truncation_error: 0.0,
    })
}

/// `Σ_{t ∈ J_n} φ̂_t g(s)`.
pub fn sum_dual_partial(action: &NsAction, g: &L1Function, s: &Atom, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for t in CubeWindow::centered(n, action.dim()).iter() {
        let (image, log_rn) = action.apply_with_log_rn(&t, s)?;
        let v = g.get(&image);
        if v > 0.0 {
            total += v * log_rn.exp();
        }
    }
    Ok(total)
}

/// `∫_W sup_{s ∈ ℤᵈ} f(w, s) τ(dw)` for `f` on the translation model of `form`.
pub fn dissipative_limit(form: &KrengelForm, f: &L1Function) -> Result<f64> {
    if f.is_zero() {
        return Err(Error::Degenerate(
            "the dissipative limit needs f with positive mass".into(),
        ));
    }
    let mut fiber_sup: BTreeMap<Atom, f64> = BTreeMap::new();
    for (atom, v) in f.iter() {
        let cut = atom
            .len()
            .checked_sub(form.d)
            .ok_or_else(|| Error::UnknownAtom(atom.clone()))?;
        let w = Atom(atom.0[..cut].to_vec());
        let slot = fiber_sup.entry(w).or_insert(0.0);
        *slot = slot.max(v);
    }
    let mut total = 0.0;
    for (w, h) in &fiber_sup {
        total += form.tau(w)? * h;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictLabel {
    ConservativeConsistent,
    DissipativeConsistent,
    Inconclusive,
}

impl fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictLabel::ConservativeConsistent => "conservative-consistent",
            VerdictLabel::DissipativeConsistent => "dissipative-consistent",
            VerdictLabel::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerdictConfig {
    /// Decay threshold: conservative-consistent needs `a_final ≤ θ_dec · a_initial`.
    pub theta_dec: f64,
    /// Stability threshold: `|a_{n_max} − a_{n_max/2}| ≤ θ_stab · a_{n_max}`.
    pub theta_stab: f64,
    pub window: WindowKind,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        VerdictConfig {
            theta_dec: 0.1,
            theta_stab: 0.05,
            window: WindowKind::Corner,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesEvidence {
    /// Position of `g_m` in the input sequence.
    pub index: usize,
    pub norm: f64,
    pub initial_n: usize,
    pub initial: f64,
    pub half_n: usize,
    pub half: f64,
    pub final_n: usize,
    pub final_value: f64,
    pub decayed: bool,
    pub stable: bool,
}

/// Heuristic label consistent with the observed `a_n` trends; not a proof.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub config: VerdictConfig,
    pub evidence: Vec<SeriesEvidence>,
    /// Stabilized level of the first stable series, when dissipative-consistent.
    pub level: Option<f64>,
}

/// Decision rule, applied in order:
/// 1. conservative-consistent if every series has `a_final ≤ θ_dec · a_initial`;
/// 2. dissipative-consistent if some series is stable at a positive level,
///    `|a_{n_max} − a_{⌊n_max/2⌋}| ≤ θ_stab · a_{n_max}`;
/// 3. inconclusive otherwise.
pub fn conservativity_verdict(
    action: &NsAction,
    gs: &[L1Function],
    ns: &[usize],
    config: VerdictConfig,
) -> Result<Verdict> {
    check_increasing(ns)?;
    if gs.is_empty() {
        return Err(Error::InvalidInput("the verdict needs at least one function".into()));
    }
    for pair in gs.windows(2) {
        let a: BTreeSet<&Atom> = pair[0].support().collect();
        let b: BTreeSet<&Atom> = pair[1].support().collect();
        if !a.is_subset(&b) {
            return Err(Error::InvalidInput(
                "function supports must be nested and increasing".into(),
            ));
        }
    }
    let n_first = ns[0];
    let n_max = *ns.last().expect("nonempty");
    let n_half = (n_max / 2).max(1);
    let mut evidence = Vec::with_capacity(gs.len());
    for (index, g) in gs.iter().enumerate() {
        let series = stat_series(action, g, ns, config.window)?;
        let initial = series.records[0].a_n;
        let final_value = series.records.last().expect("nonempty").a_n;
        let half = match series.records.iter().find(|r| r.n == n_half) {
            Some(r) => r.a_n,
            None => stat_a_n(action, g, n_half, config.window)?,
        };
        evidence.push(SeriesEvidence {
            index,
            norm: g.norm(),
            initial_n: n_first,
            initial,
            half_n: n_half,
            half,
            final_n: n_max,
            final_value,
            decayed: final_value <= config.theta_dec * initial,
            stable: final_value > 0.0 && (final_value - half).abs() <= config.theta_stab * final_value,
        });
    }
    let (label, level) = if evidence.iter().all(|e| e.decayed) {
        (VerdictLabel::ConservativeConsistent, None)
    } else if let Some(e) = evidence.iter().find(|e| e.stable) {
        (VerdictLabel::DissipativeConsistent, Some(e.final_value))
    } else {
        (VerdictLabel::Inconclusive, None)
    };
    Ok(Verdict {
        label,
        config,
        evidence,
        level,
    })
}

/// `4, 8, …, 256`: the default sweep.
pub fn default_ns() -> Vec<usize> {
    (2..=8).map(|k| 1usize << k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::krengel_normal_form;
    use crate::measure::AtomSpace;
    use crate::zoo;

    fn a(k: i64) -> Atom {
        Atom::scalar(k)
    }

    fn ind(action: &NsAction, atoms: &[Atom]) -> L1Function {
        L1Function::indicator(action.space(), atoms).unwrap()
    }

    #[test]
    fn max_function_examples() {
        let c4 = zoo::fixture("C4").unwrap();
        let g = ind(&c4, &[a(0)]);
        let m = max_dual_function(&c4, &g, CubeWindow::corner(2, 1)).unwrap();
        assert_eq!(m, ind(&c4, &[a(0), a(3)]));
        assert_eq!(max_dual_function(&c4, &g, CubeWindow::corner(1, 1)).unwrap(), g);
        let tr1 = zoo::fixture("TR1").unwrap();
        let m = max_dual_function(&tr1, &ind(&tr1, &[a(0)]), CubeWindow::corner(4, 1)).unwrap();
        assert_eq!(m, ind(&tr1, &[a(-3), a(-2), a(-1), a(0)]));
    }

    #[test]
    fn stat_examples() {
        let c4 = zoo::fixture("C4").unwrap();
        assert_eq!(stat_a_n(&c4, &ind(&c4, &[a(0)]), 8, WindowKind::Corner).unwrap(), 0.5);
        let tr1 = zoo::fixture("TR1").unwrap();
        for n in [1, 3, 17] {
            assert_eq!(stat_a_n(&tr1, &ind(&tr1, &[a(0)]), n, WindowKind::Corner).unwrap(), 1.0);
        }
        let st2 = zoo::fixture("ST2").unwrap();
        assert_eq!(
            stat_a_n(&st2, &ind(&st2, &[a(0)]), 10, WindowKind::Corner).unwrap(),
            0.1
        );
        assert!(stat_a_n(&c4, &ind(&c4, &[a(0)]), 0, WindowKind::Corner).is_err());
    }

    #[test]
    fn centered_window_normalization() {
        // J_n on C4 covers every atom once n ≥ 2, so a_n = 4/(2n+1).
        let c4 = zoo::fixture("C4").unwrap();
        let v = stat_a_n(&c4, &ind(&c4, &[a(0)]), 5, WindowKind::Centered).unwrap();
        assert_eq!(v, 4.0 / 11.0);
    }

    #[test]
    fn series_examples() {
        let c4 = zoo::fixture("C4").unwrap();
        let s = stat_series(&c4, &ind(&c4, &[a(0)]), &[4, 8, 16], WindowKind::Corner).unwrap();
        assert_eq!(s.values(), vec![1.0, 0.5, 0.25]);
        let tr1 = zoo::fixture("TR1").unwrap();
        let s = stat_series(&tr1, &ind(&tr1, &[a(0)]), &[2, 4, 8], WindowKind::Corner).unwrap();
        assert_eq!(s.values(), vec![1.0, 1.0, 1.0]);
        let od3 = zoo::fixture("OD3").unwrap();
        let all = od3.space().atoms().unwrap();
        let s = stat_series(&od3, &ind(&od3, &all), &[8, 64], WindowKind::Corner).unwrap();
        assert!(
            s.values()[0] <= 3.375 / 8.0 && s.values()[1] <= 3.375 / 64.0,
            "{:?}",
            s.values()
        );
        assert!(stat_series(&c4, &ind(&c4, &[a(0)]), &[4, 4], WindowKind::Corner).is_err());
        assert!(stat_series(&c4, &ind(&c4, &[a(0)]), &[], WindowKind::Corner).is_err());
    }

    #[test]
    fn csv_layout() {
        let c4 = zoo::fixture("C4").unwrap();
        let s = stat_series(&c4, &ind(&c4, &[a(0)]), &[4, 8], WindowKind::Corner).unwrap();
        assert_eq!(
            s.to_csv(false),
            "n,window,a_n,support,ms\n4,corner,1.0,4,0\n8,corner,0.5,4,0\n"
        );
    }

    #[test]
    fn partial_sum_examples() {
        let st2 = zoo::fixture("ST2").unwrap();
        assert_eq!(sum_dual_partial(&st2, &ind(&st2, &[a(0)]), &a(0), 3).unwrap(), 7.0);
        let tr1 = zoo::fixture("TR1").unwrap();
        for n in [1, 5, 40] {
            assert_eq!(sum_dual_partial(&tr1, &ind(&tr1, &[a(0)]), &a(0), n).unwrap(), 1.0);
        }
        let c4 = zoo::fixture("C4").unwrap();
        assert_eq!(sum_dual_partial(&c4, &ind(&c4, &[a(0)]), &a(0), 4).unwrap(), 3.0);
    }

    #[test]
    fn dissipative_limit_examples() {
        let tr1 = zoo::fixture("TR1").unwrap();
        let form = krengel_normal_form(&tr1, &[a(0)], 8).unwrap();
        let model = form.translation_action().unwrap();
        let f = L1Function::new(model.space(), [(Atom(vec![0, 0]), 1.0)]).unwrap();
        assert_eq!(dissipative_limit(&form, &f).unwrap(), 1.0);
        let f = L1Function::new(model.space(), [(Atom(vec![0, 0]), 2.0), (Atom(vec![0, 5]), 1.0)]).unwrap();
        assert_eq!(dissipative_limit(&form, &f).unwrap(), 2.0);

        let w = AtomSpace::finite("W", [(a(1), 1.0), (a(2), 2.0)]).unwrap();
        let two = KrengelForm {
            d: 1,
            radius: 0,
            base: Some(w),
            table: BTreeMap::new(),
        };
        let model = two.translation_action().unwrap();
        let f = L1Function::new(model.space(), [(Atom(vec![1, 0]), 1.0), (Atom(vec![2, 7]), 3.0)]).unwrap();
        assert_eq!(dissipative_limit(&two, &f).unwrap(), 7.0);
        assert!(matches!(
            dissipative_limit(&two, &L1Function::zero()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn verdict_examples() {
        let ns = default_ns();
        let c4 = zoo::fixture("C4").unwrap();
        let all = c4.space().atoms().unwrap();
        let v = conservativity_verdict(&c4, &[ind(&c4, &all)], &ns, VerdictConfig::default()).unwrap();
        assert_eq!(v.label, VerdictLabel::ConservativeConsistent);
        assert_eq!(v.evidence[0].final_value * 64.0, v.evidence[0].initial);

        let tr1 = zoo::fixture("TR1").unwrap();
        let v = conservativity_verdict(&tr1, &[ind(&tr1, &[a(0)])], &ns, VerdictConfig::default()).unwrap();
        assert_eq!(v.label, VerdictLabel::DissipativeConsistent);
        assert_eq!(v.level, Some(1.0));

        let mix = zoo::fixture("MIX").unwrap();
        let g = ind(&mix, &[Atom(vec![0, 0]), Atom(vec![1, 0])]);
        let v = conservativity_verdict(&mix, &[g], &ns, VerdictConfig::default()).unwrap();
        assert_eq!(v.label, VerdictLabel::DissipativeConsistent);
        assert_eq!(v.level, Some((4.0 + 256.0) / 256.0));
    }

    #[test]
    fn verdict_rejects_non_nested_supports() {
        let c4 = zoo::fixture("C4").unwrap();
        let gs = [ind(&c4, &[a(0)]), ind(&c4, &[a(1)])];
        assert!(conservativity_verdict(&c4, &gs, &[4, 8], VerdictConfig::default()).is_err());
    }

    #[test]
    fn short_sweep_is_inconclusive() {
        // a_1 = 2, a_2 = 3/2 on C4 with g = I_{0,1}: neither decayed nor stable.
        let c4 = zoo::fixture("C4").unwrap();
        let v = conservativity_verdict(&c4, &[ind(&c4, &[a(0), a(1)])], &[1, 2], VerdictConfig::default()).unwrap();
        assert_eq!(v.label, VerdictLabel::Inconclusive);
    }
}
