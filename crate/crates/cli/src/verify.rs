//! Property suites behind `verify`.

use anyhow::Result;
use clap::ValueEnum;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use suq2_bmo::bmo::{Depolarizing, SchurSemigroup, Semigroup, Suq2Heat, TorusHeat, ValidationReport};
use suq2_bmo::dilation::{build_fields, DilationState, GramKernel};
use suq2_bmo::fdlp::{holder_check, trace_duality, BlockSubalgebra, Exponent, FdAlgebra};
use suq2_bmo::gnsmod::{axiom_check, null_space, GnsElement, ModularUcp};
use suq2_bmo::linalg::{random_density, random_matrix};
use suq2_bmo::polalg::Symbol;
use suq2_bmo::scalar::CMatrix;
use suq2_bmo::trunc::{transference_intertwine, TorusSample, TruncRep};
use suq2_bmo::ExactSUq2;

use crate::commands::{rng, Outcome, Table};
use crate::config::RunConfig;
use crate::specs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Relations,
    GnsSymmetry,
    KadisonSchwarz,
    Holder,
    Transference,
    Dilation,
    All,
}

impl Suite {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

/// One invariant: passes when `defect ≤ tol`.
#[derive(Clone, Debug, Serialize)]
struct Check {
    suite: String,
    name: String,
    defect: f64,
    tol: f64,
    pass: bool,
}

struct Checks {
    suite: String,
    list: Vec<Check>,
}

impl Checks {
    fn new(suite: Suite) -> Self {
        Self {
            suite: suite.name(),
            list: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, defect: f64, tol: f64) {
        self.list.push(Check {
            suite: self.suite.clone(),
            name: name.into(),
            defect,
            tol,
            // NaN fails
            pass: defect <= tol,
        });
    }

    fn validation(&mut self, r: &ValidationReport, tol: f64) {
        self.add(format!("{} unitality", r.kind), r.unitality, tol);
        self.add(format!("{} positivity", r.kind), r.positivity, tol);
        self.add(format!("{} symmetry", r.kind), r.symmetry, tol);
        self.add(format!("{} semigroup law", r.kind), r.semigroup_law, tol);
    }
}

pub fn run(cfg: &RunConfig, suite: Suite, eps: f64) -> Result<Outcome> {
    let suites = match suite {
        Suite::All => vec![
            Suite::Relations,
            Suite::GnsSymmetry,
            Suite::KadisonSchwarz,
            Suite::Holder,
            Suite::Transference,
            Suite::Dilation,
        ],
        s => vec![s],
    };
    let mut all = Vec::new();
    for s in suites {
        let mut checks = Checks::new(s);
        let mut rng = rng(cfg.seed);
        match s {
            Suite::Relations => relations(cfg, &mut checks)?,
            Suite::GnsSymmetry => gns_symmetry(cfg, &mut rng, &mut checks)?,
            Suite::KadisonSchwarz => kadison_schwarz(&mut rng, &mut checks)?,
            Suite::Holder => holder(&mut rng, &mut checks)?,
            Suite::Transference => transference(cfg, &mut rng, &mut checks)?,
            Suite::Dilation => dilation(cfg, eps, &mut checks)?,
            Suite::All => unreachable!("expanded above"),
        }
        all.extend(checks.list);
    }
    let passed = all.iter().all(|c| c.pass);
    let failed: Vec<&str> = all.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let max_defect = all.iter().map(|c| c.defect).fold(0.0, f64::max);
    let mut table = Table::new(&["suite", "name", "defect", "tol", "pass"]);
    for c in &all {
        table.push(vec![c.suite.clone(), c.name.clone(), c.defect.to_string(), c.tol.to_string(), c.pass.to_string()]);
    }
    Ok(Outcome {
        result: json!({
            "suite": suite.name(),
            "checks": all,
            "failed": failed,
            "max_defect": max_defect,
        }),
        passed,
        table,
    })
}

fn relations(cfg: &RunConfig, out: &mut Checks) -> Result<()> {
    let alg = ExactSUq2::exact();
    for (name, d) in alg.relation_defects() {
        out.add(format!("exact {name}"), if d.is_zero() { 0.0 } else { f64::INFINITY }, 0.0);
    }
    let rep = TruncRep::new(cfg.trunc_n, cfg.trunc_m, cfg.q)?;
    for (name, d) in rep.relation_defects().interior {
        out.add(format!("truncated {name} (interior)"), d, 1e-12);
    }
    // φ(γ*γ) = (1 − q²)/(1 − q⁴) against the geometric series (1 − q²) Σ q^{4k}
    let q2 = cfg.q * cfg.q;
    let series: f64 = (0..400).map(|k| q2.powi(2 * k)).sum::<f64>() * (1.0 - q2);
    let exact = alg.haar(&specs::element("0 1 1")?).eval(cfg.q).unwrap_or(f64::NAN);
    out.add("haar(γ*γ) series", (exact - series).abs(), 1e-12);
    Ok(())
}

fn gns_symmetry(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Checks) -> Result<()> {
    let dens = random_density::<f64, _>(rng, 3, 0.05);
    let alg = FdAlgebra::new(dens)?;
    out.validation(&Semigroup::Depolarizing(Depolarizing::new(alg.clone())).validate(rng), 1e-10);
    let diag = random_diag(rng, 4);
    let schur = SchurSemigroup::gaussian(FdAlgebra::new(diag)?)?;
    out.validation(&Semigroup::Schur(schur).validate(rng), 1e-10);
    out.validation(&Semigroup::<f64>::TorusHeat(TorusHeat::default()).validate(rng), 1e-10);
    let rep = TruncRep::new(cfg.trunc_n, cfg.trunc_m, cfg.q)?;
    out.validation(&Semigroup::Suq2Heat(Suq2Heat::new(rep)?).validate(rng), 1e-10);

    // module brackets: ⟨z, w⟩* = ⟨w, z⟩ for a modular ucp map
    let phi = ModularUcp::depolarizing(alg, 0.6)?;
    let nulls = null_space(&phi);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = GnsElement::random(rng, 3, 3);
        let w = GnsElement::random(rng, 3, 3);
        let a = random_matrix::<f64, _>(rng, 3, 3);
        let p = Exponent::new(rng.gen_range(1.0..6.0))?;
        worst = worst.max(axiom_check(&phi, &z, &w, &a, p, &nulls).adjoint_symmetry);
    }
    out.add("gns module adjoint symmetry", worst, 1e-10);
    Ok(())
}

fn random_diag(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    CMatrix::from_fn(n, n, |i, j| Complex::new(if i == j { w[i] / s } else { 0.0 }, 0.0))
}

fn kadison_schwarz(rng: &mut ChaCha8Rng, out: &mut Checks) -> Result<()> {
    // block-diagonal subalgebras are modular invariant for diagonal densities
    let mut worst = 0.0f64;
    for i in 0..60 {
        let blocks = if i % 2 == 0 { vec![2, 2] } else { vec![1, 3] };
        let alg = FdAlgebra::new(random_diag(rng, 4))?;
        let sub = BlockSubalgebra::standard(blocks)?;
        let a = random_matrix::<f64, _>(rng, 4, 4);
        let z = rng.gen_range(-1.0..=1.0);
        let gap = alg.kadison_schwarz_gap(&sub, &a, z)?;
        worst = worst.max(-gap);
    }
    out.add("E(XX*) − E(X)E(X)* ≥ 0", worst.max(0.0), 1e-10);
    Ok(())
}

fn holder(rng: &mut ChaCha8Rng, out: &mut Checks) -> Result<()> {
    let exps = [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY];
    let mut worst = 0.0f64;
    let mut worst_dual = 0.0f64;
    for _ in 0..100 {
        let alg = FdAlgebra::new(random_density::<f64, _>(rng, 3, 0.05))?;
        let p = exps[rng.gen_range(0..exps.len())];
        let p = Exponent::new(p)?;
        // any q with 1/p + 1/q ≤ 1
        let q = Exponent::from_inv(rng.gen_range(0.0..=(1.0 - p.inv())))?;
        let a = alg.embed(&random_matrix(rng, 3, 3), p, rng.gen_range(-1.0..=1.0));
        let c = alg.embed(&random_matrix(rng, 3, 3), q, rng.gen_range(-1.0..=1.0));
        let r = holder_check(&a, &c)?;
        worst = worst.max((r.lhs - r.rhs) / r.rhs.max(1e-300));
        let conj = Exponent::from_inv(1.0 - p.inv())?;
        let d = alg.embed(&random_matrix(rng, 3, 3), conj, 0.0);
        let t = trace_duality(&a, &d)?;
        worst_dual = worst_dual.max((t.lhs - t.rhs) / t.rhs.max(1e-300));
    }
    out.add("‖ac‖_r ≤ ‖a‖_p ‖c‖_q", worst.max(0.0), 1e-10);
    out.add("|Tr(xy)| ≤ ‖x‖_p ‖y‖_p'", worst_dual.max(0.0), 1e-10);
    Ok(())
}

fn transference(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Checks) -> Result<()> {
    let rep = TruncRep::new(cfg.trunc_n, cfg.trunc_m, cfg.q)?;
    let sample = TorusSample::new(cfg.torus_samples)?;
    let elements = ["1 0 0", "0 1 0", "0 0 1", "2 0 0", "1 1 0", "-1 0 1", "0 1 1", "1 0 0 + 0.5 * -2 1 1"];
    let mut symbols: Vec<(String, Symbol<f64>)> =
        [0.1, 1.0, 5.0].iter().map(|t| (format!("heat:{t}"), Symbol::heat(*t))).collect();
    let table = Symbol::Table {
        values: (-3..=3).map(|k| (k, Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect(),
        default: Complex::new(0.0, 0.0),
    };
    symbols.push(("random table".into(), table));
    for e in elements {
        let x = specs::numeric_element(e, cfg.q)?;
        for (name, s) in &symbols {
            let r = transference_intertwine(&rep, &sample, s, &x)?;
            out.add(format!("intertwine {name} on `{e}`"), r.defect, 1e-10);
            out.add(format!("conjugation {name} on `{e}`"), r.conjugation_defect, 1e-10);
        }
    }
    Ok(())
}

fn dilation(cfg: &RunConfig, eps: f64, out: &mut Checks) -> Result<()> {
    // fixed small model: N = 4 sites per leg, M = 1, depth 2
    let rep = TruncRep::new(4, 1, cfg.q)?;
    let state = DilationState::new(rep, eps, 2)?;
    for e in ["1 0 0", "0 1 0", "1 1 0", "0 1 1"] {
        let x = specs::numeric_element(e, cfg.q)?;
        for (m, k) in [(0, 1), (0, 2), (1, 2)] {
            let r = state.dilation_identity_check(m, k, &x)?;
            out.add(format!("E_{m} π_{k} = π_{m} Φ on `{e}`"), r.interior_defect, 1e-8);
        }
    }
    for n in 1..=4 {
        let car = build_fields(&GramKernel::new(eps, n)?)?.car_defects();
        let worst = car.anticommutation.max(car.vacuum_covariance).max(car.self_adjoint);
        out.add(format!("CAR relations, {n} sites"), worst, 1e-12);
    }
    Ok(())
}
