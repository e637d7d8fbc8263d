use std::collections::BTreeSet;

use serde::Serialize;

use maharam_core::action::{CocycleReport, CubeWindow};
use maharam_core::hopf::{
    hopf_decompose, krengel_normal_form, verify_equivalence, EquivalenceReport, HopfLabel, HopfLabels, KrengelDoc,
    KrengelForm,
};
use maharam_core::maharam::{extend, MeasureReport, Rect};
use maharam_core::maximal::{
    conservativity_verdict, default_ns, dissipative_limit, stat_series, Verdict, VerdictConfig,
};
use maharam_core::zoo::{self, BuilderInfo, GroundTruth, ZooSpec, FIXTURES};
use maharam_core::{rel_dev, Atom, GroupElement, NsAction, DEFAULT_REL_TOL};

use crate::inputs::*;
use crate::{CocycleArgs, Common, DualityArgs, HopfArgs, KrengelArgs, MaharamArgs, OutArgs, StatArgs, VerdictArgs};

fn setup(common: &Common, command: &str) -> CliResult<(Config, Loaded)> {
    let mut config = load_config(common.config.as_deref(), command)?;
    let loaded = load_action(common.action.as_deref(), common.params.as_deref(), &mut config)?;
    Ok((config, loaded))
}

fn single_g(flag: Option<String>, config: Option<OneOrMany>) -> CliResult<Option<String>> {
    match (flag, config) {
        (Some(g), _) => Ok(Some(g)),
        (None, Some(OneOrMany::One(g))) => Ok(Some(g)),
        (None, Some(OneOrMany::Many(mut v))) if v.len() == 1 => Ok(v.pop()),
        (None, Some(OneOrMany::Many(_))) => Err(CliError::usage("this command takes a single g")),
        (None, None) => Ok(None),
    }
}

fn out_path(common: &Common, config: &mut Config) -> Option<std::path::PathBuf> {
    common.out.out.clone().or(config.out.take())
}

fn tolerance(flag: Option<f64>, config: Option<f64>, default: f64, what: &str) -> CliResult<f64> {
    check_positive(flag.or(config).unwrap_or(default), what)
}

/// The given element, or every element of the centered window.
fn elements(
    flag: Option<&str>,
    config: Option<ElementValue>,
    radius: usize,
    action: &NsAction,
) -> CliResult<Vec<GroupElement>> {
    let d = action.dim();
    match (flag, config) {
        (Some(t), _) => Ok(vec![parse_element(t, d)?]),
        (None, Some(v)) => Ok(vec![element_from_config(v, d)?]),
        (None, None) => Ok(CubeWindow::centered(radius, d).iter().collect()),
    }
}

pub fn stat(args: StatArgs) -> CliResult<Output> {
    if let Some(ns) = &args.n {
        check_ns(ns, "n")?;
    }
    let (mut config, loaded) = setup(&args.common, "stat")?;
    let action = &loaded.action;
    require_commuting(action)?;
    let ns = args.n.or(config.n.take()).unwrap_or_else(default_ns);
    check_ns(&ns, "n")?;
    let window = parse_window(args.window.or(config.window.take()))?;
    let timing = args.timing || config.timing.unwrap_or(false);
    let g_spec = single_g(args.g, config.g.take())?.unwrap_or_else(|| "exhaustion:0".into());
    let g = parse_function(&g_spec, action)?;
    let series = stat_series(action, &g, &ns, window)?;
    Ok(Output {
        command: "stat",
        extension: "csv",
        body: series.to_csv(timing),
        pass: true,
        out: out_path(&args.common, &mut config),
    })
}

#[derive(Serialize)]
struct VerdictOutput<'a> {
    action: &'a str,
    functions: Vec<String>,
    ns: Vec<usize>,
    verdict: Verdict,
    expected: Option<String>,
    pass: bool,
}

pub fn verdict(args: VerdictArgs) -> CliResult<Output> {
    let (mut config, loaded) = setup(&args.common, "verdict")?;
    let action = &loaded.action;
    require_commuting(action)?;
    let functions: Vec<String> = if !args.g.is_empty() {
        args.g
    } else {
        match config.g.take() {
            Some(OneOrMany::One(g)) => vec![g],
            Some(OneOrMany::Many(v)) => v,
            None => (1..=3).map(|m| format!("exhaustion:{m}")).collect(),
        }
    };
    let gs = functions
        .iter()
        .map(|s| parse_function(s, action))
        .collect::<CliResult<Vec<_>>>()?;
    let ns = args.n.or(config.n.take()).unwrap_or_else(default_ns);
    check_ns(&ns, "n")?;
    let defaults = VerdictConfig::default();
    let vc = VerdictConfig {
        theta_dec: tolerance(args.theta_dec, config.theta_dec, defaults.theta_dec, "theta-dec")?,
        theta_stab: tolerance(args.theta_stab, config.theta_stab, defaults.theta_stab, "theta-stab")?,
        window: parse_window(args.window.or(config.window.take()))?,
    };
    let expected = args.expect.or(config.expect.take());
    if let Some(e) = &expected {
        if !["conservative-consistent", "dissipative-consistent", "inconclusive"].contains(&e.as_str()) {
            return Err(CliError::usage(format!("unknown verdict label '{e}'")));
        }
    }
    let verdict = conservativity_verdict(action, &gs, &ns, vc)?;
    let pass = expected.as_deref().is_none_or(|e| e == verdict.label.to_string());
    let report = VerdictOutput {
        action: action.name(),
        functions,
        ns,
        verdict,
        expected,
        pass,
    };
    Output::json("verdict", &report, pass, out_path(&args.common, &mut config))
}

#[derive(Serialize)]
struct CommutativityFailure {
    generators: (usize, usize),
    atom: Atom,
}

fn commutativity(action: &NsAction, samples: &[Atom]) -> Vec<CommutativityFailure> {
    action
        .check_commutativity(samples)
        .into_iter()
        .map(|(i, j, atom)| CommutativityFailure {
            generators: (i + 1, j + 1),
            atom,
        })
        .collect()
}

#[derive(Serialize)]
struct CocycleOutput<'a> {
    action: &'a str,
    cocycle: CocycleReport,
    commutativity_failures: Vec<CommutativityFailure>,
    pass: bool,
}

pub fn cocycle_check(args: CocycleArgs) -> CliResult<Output> {
    let (mut config, loaded) = setup(&args.common, "cocycle-check")?;
    let action = &loaded.action;
    let radius = args.radius.or(config.radius).unwrap_or(4);
    let samples = action.sample_atoms(args.samples.or(config.samples).unwrap_or(1));
    let tol = tolerance(args.tol, config.tol, DEFAULT_REL_TOL, "tol")?;
    let cocycle = action.check_cocycle(radius, &samples, tol)?;
    let commutativity_failures = commutativity(action, &samples);
    let pass = cocycle.pass && commutativity_failures.is_empty();
    let report = CocycleOutput {
        action: action.name(),
        cocycle,
        commutativity_failures,
        pass,
    };
    Output::json("cocycle-check", &report, pass, out_path(&args.common, &mut config))
}

#[derive(Serialize)]
struct DualityEntry {
    t: GroupElement,
    norm: f64,
    dual_norm: f64,
    isometry_dev: f64,
    duality_lhs: f64,
    duality_rhs: f64,
    duality_dev: f64,
    inverse_dev: f64,
}

#[derive(Serialize)]
struct DualityOutput<'a> {
    action: &'a str,
    g: String,
    set: String,
    tol: f64,
    entries: Vec<DualityEntry>,
    max_dev: f64,
    commutativity_failures: Vec<CommutativityFailure>,
    pass: bool,
}

pub fn duality_check(args: DualityArgs) -> CliResult<Output> {
    let (mut config, loaded) = setup(&args.common, "duality-check")?;
    let action = &loaded.action;
    let g_spec = single_g(args.g, config.g.take())?.unwrap_or_else(|| "exhaustion:1".into());
    let set_spec = args.set.or(config.set.take()).unwrap_or_else(|| "exhaustion:1".into());
    let g = parse_function(&g_spec, action)?;
    let set = parse_atom_set(&set_spec, action)?;
    let tol = tolerance(args.tol, config.tol, DEFAULT_REL_TOL, "tol")?;
    let radius = args.radius.or(config.radius).unwrap_or(3);
    let ts = elements(args.t.as_deref(), config.t.take(), radius, action)?;
    let mut entries = Vec::with_capacity(ts.len());
    let mut max_dev: f64 = 0.0;
    for t in ts {
        let h = action.dual_apply(&t, &g)?;
        let back = action.dual_apply(&-&t, &h)?;
        let atoms: BTreeSet<&Atom> = g.support().chain(back.support()).collect();
        let inverse_dev = atoms
            .into_iter()
            .map(|s| rel_dev(back.get(s), g.get(s)))
            .fold(0.0, f64::max);
        let (lhs, rhs) = action.check_duality(&t, &g, &set)?;
        let entry = DualityEntry {
            norm: g.norm(),
            dual_norm: h.norm(),
            isometry_dev: rel_dev(h.norm(), g.norm()),
            duality_lhs: lhs,
            duality_rhs: rhs,
            duality_dev: rel_dev(lhs, rhs),
            inverse_dev,
            t,
        };
        max_dev = max_dev
            .max(entry.isometry_dev)
            .max(entry.duality_dev)
            .max(entry.inverse_dev);
        entries.push(entry);
    }
    let commutativity_failures = commutativity(action, &action.sample_atoms(1));
    let pass = max_dev <= tol && commutativity_failures.is_empty();
    let report = DualityOutput {
        action: action.name(),
        g: g_spec,
        set: set_spec,
        tol,
        entries,
        max_dev,
        commutativity_failures,
        pass,
    };
    Output::json("duality-check", &report, pass, out_path(&args.common, &mut config))
}

#[derive(Serialize)]
struct ExtensionRow {
    m: usize,
    n: usize,
    lhs: f64,
    rhs: f64,
    rel_dev: f64,
}

#[derive(Serialize)]
struct MaharamOutput<'a> {
    action: &'a str,
    tol: f64,
    ext_tol: f64,
    base_cocycle: CocycleReport,
    measure: Vec<MeasureReport>,
    extension: Vec<ExtensionRow>,
    pass: bool,
}

pub fn maharam_verify(args: MaharamArgs) -> CliResult<Output> {
    let (mut config, loaded) = setup(&args.common, "maharam-verify")?;
    let action = &loaded.action;
    let out = out_path(&args.common, &mut config);
    let tol = tolerance(args.tol, config.tol, DEFAULT_REL_TOL, "tol")?;
    let ext_tol = tolerance(args.ext_tol, config.ext_tol, 1e-12, "ext-tol")?;
    let ms = args.m.or(config.m.take()).unwrap_or_else(|| vec![1, 2]);
    check_ns(&ms, "m")?;
    let ns = args
        .n
        .or(config.n.take())
        .unwrap_or_else(|| (1..=7).map(|k| 1usize << k).collect());
    check_ns(&ns, "n")?;
    let radius = args.radius.or(config.radius).unwrap_or(2);
    let ts = elements(args.t.as_deref(), config.t.take(), radius, action)?;
    let rects: Vec<Rect> = match (args.rects, config.rects.take()) {
        (Some(p), _) | (None, Some(RectsValue::Path(p))) => load_json_file(&p)?,
        (None, Some(RectsValue::Inline(r))) => r,
        (None, None) => action
            .sample_atoms(1)
            .into_iter()
            .map(|s| Rect::new(s, 0.0, 1.0))
            .collect::<Result<_, _>>()?,
    };
    for r in &rects {
        r.validate()?;
        if !action.space().contains(&r.atom) {
            return Err(CliError::usage(format!("rect atom {} is not in the space", r.atom)));
        }
    }
    let base_cocycle = action.check_cocycle(2, &action.sample_atoms(2), tol)?;
    let mut report = MaharamOutput {
        action: action.name(),
        tol,
        ext_tol,
        pass: base_cocycle.pass,
        base_cocycle,
        measure: Vec::new(),
        extension: Vec::new(),
    };
    if report.pass {
        let ext = extend(action)?;
        for t in &ts {
            let m = ext.check_measure_preservation(t, &rects, tol)?;
            report.pass &= m.pass;
            report.measure.push(m);
        }
        for &m in &ms {
            for &n in &ns {
                let x = ext.extension_stat(m, n)?;
                let dev = x.rel_dev();
                report.pass &= dev <= ext_tol;
                report.extension.push(ExtensionRow {
                    m,
                    n,
                    lhs: x.lhs,
                    rhs: x.rhs,
                    rel_dev: dev,
                });
            }
        }
    }
    let pass = report.pass;
    Output::json("maharam-verify", &report, pass, out)
}

#[derive(Serialize)]
struct Counts {
    conservative: usize,
    dissipative: usize,
    undetermined: usize,
}

#[derive(Serialize)]
struct Mismatch {
    atom: Atom,
    label: String,
    truth: GroundTruth,
}

#[derive(Serialize)]
struct HopfOutput<'a> {
    action: &'a str,
    counts: Counts,
    hopf: HopfLabels,
    truth_checked: usize,
    mismatches: Vec<Mismatch>,
    pass: bool,
}

pub fn hopf(args: HopfArgs) -> CliResult<Output> {
    let (mut config, loaded) = setup(&args.common, "hopf")?;
    let action = &loaded.action;
    require_commuting(action)?;
    let radius = args.radius.or(config.radius).unwrap_or(4);
    let labels = hopf_decompose(action, radius)?;
    let mut truth_checked = 0;
    let mut mismatches = Vec::new();
    for (atom, &label) in &labels.labels {
        let expected = match loaded.atom_truth(atom) {
            Some(GroundTruth::Conservative) => HopfLabel::Conservative,
            Some(GroundTruth::Dissipative) => HopfLabel::Dissipative,
            Some(GroundTruth::Mixed { .. }) | None => continue,
        };
        truth_checked += 1;
        if label != expected {
            mismatches.push(Mismatch {
                atom: atom.clone(),
                label: label.to_string(),
                truth: loaded.atom_truth(atom).expect("checked above"),
            });
        }
    }
    let counts = Counts {
        conservative: labels.count(HopfLabel::Conservative),
        dissipative: labels.count(HopfLabel::Dissipative),
        undetermined: labels.labels.len()
            - labels.count(HopfLabel::Conservative)
            - labels.count(HopfLabel::Dissipative),
    };
    let pass = mismatches.is_empty();
    let report = HopfOutput {
        action: action.name(),
        counts,
        hopf: labels,
        truth_checked,
        mismatches,
        pass,
    };
    Output::json("hopf", &report, pass, out_path(&args.common, &mut config))
}

#[derive(Serialize)]
struct KrengelOutput<'a> {
    action: &'a str,
    form: KrengelDoc,
    report: EquivalenceReport,
    dissipative_limit: Option<f64>,
    pass: bool,
}

pub fn krengel(args: KrengelArgs) -> CliResult<Output> {
    let (mut config, loaded) = setup(&args.common, "krengel")?;
    let action = &loaded.action;
    require_commuting(action)?;
    let (form, radius) = match args.form.or(config.form.take()) {
        Some(path) => {
            let doc: KrengelDoc = load_json_file(&path)?;
            let form = KrengelForm::from_doc(doc)?;
            let radius = args.radius.or(config.radius).unwrap_or(form.radius);
            (form, radius)
        }
        None => {
            let radius = args.radius.or(config.radius).unwrap_or(4);
            let region_spec = args
                .region
                .or(config.region.take())
                .unwrap_or_else(|| "exhaustion:1".into());
            let region = parse_atom_set(&region_spec, action)?;
            (krengel_normal_form(action, &region, radius)?, radius)
        }
    };
    let report = verify_equivalence(action, &form, radius)?;
    let limit = match single_g(args.g, config.g.take())? {
        Some(spec) => {
            let g = parse_function(&spec, action)?;
            Some(dissipative_limit(&form, &form.pull_back(&g)?)?)
        }
        None => None,
    };
    let pass = report.pass;
    let output = KrengelOutput {
        action: action.name(),
        form: form.to_doc()?,
        report,
        dissipative_limit: limit,
        pass,
    };
    Output::json("krengel", &output, pass, out_path(&args.common, &mut config))
}

#[derive(Serialize)]
struct FixtureInfo {
    name: &'static str,
    spec: ZooSpec,
    ground_truth: GroundTruth,
}

#[derive(Serialize)]
struct ZooListing {
    builders: Vec<BuilderInfo>,
    fixtures: Vec<FixtureInfo>,
}

pub fn zoo_list(args: OutArgs) -> CliResult<Output> {
    let fixtures = FIXTURES
        .iter()
        .map(|&name| {
            let spec = zoo::fixture_spec(name).expect("listed fixture");
            FixtureInfo {
                name,
                ground_truth: zoo::ground_truth(&spec),
                spec,
            }
        })
        .collect();
    let listing = ZooListing {
        builders: zoo::list_builders(),
        fixtures,
    };
    Output::json("zoo-list", &listing, true, args.out)
}
