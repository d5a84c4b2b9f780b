//! Subcommand definitions and their implementations.

use anyhow::{anyhow, bail, Result};
use clap::{Subcommand, ValueEnum};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use suq2_bmo::bmo::{
    bmo_norm, project_circ, torus_bmo_norm, BmoPair, Depolarizing, MarkovSemigroup, SchurSemigroup, Semigroup,
    Suq2Heat, TGrid, TorusHeat,
};
use suq2_bmo::dilation::DilationState;
use suq2_bmo::fdlp::Exponent;
use suq2_bmo::gnsmod::{axiom_check, cauchy_schwarz_factor, norm_profile, null_space, GnsElement};
use suq2_bmo::linalg::{random_matrix, spectral_norm, trace};
use suq2_bmo::peterweyl::{corep_matrix, derive_normalization, eigenvalue_check, orthogonality_gram, HalfInt};
use suq2_bmo::trunc::{bmo_s_norm, l2_multiplier_bound, transference_intertwine, PolTorusField, TensorHeat, TorusSample, TruncRep};
use suq2_bmo::{Error, ExactSUq2, NumericSUq2, QScalar};

use crate::config::RunConfig;
use crate::specs;
use crate::verify::{self, Suite};

/// Largest spin accepted by exact Peter–Weyl computations.
const MAX_TWICE_L: i64 = 6;

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Exact and numeric Haar state of an element
    Haar {
        /// Element, e.g. "0 1 1" or "q^2 * 1 0 0 + (1 - q)/2 * 0 1 1"
        element: String,
    },
    /// Corepresentation matrix u^(l), its orthogonality and eigenvalue table
    Peterweyl {
        /// Spin label l ≤ 3, e.g. 0, 1/2, 1.5
        l: String,
        /// Second spin for a cross Gram check
        #[arg(long)]
        cross: Option<String>,
    },
    /// L2 norm of a Fourier–Schur multiplier on span{u^(l)_ij : l ≤ l-max}
    Multiplier {
        /// heat:T, indicator:K1,K2, const:C or table:K=V,...,default=V
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value = "3")]
        l_max: String,
    },
    /// Semigroup BMO norm, max of the column and row seminorms
    Bmo {
        #[arg(long, value_enum)]
        semigroup: SemigroupKind,
        /// Matrix "a b; c d" (depolarizing, schur), k:c pairs (torus) or
        /// an element (suq2)
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        /// Diagonal density weights for matrix semigroups [default: tracial]
        #[arg(long)]
        density: Option<String>,
        /// Subtract the fixed-point component first
        #[arg(long)]
        project: bool,
    },
    /// L_p norm of the Kosaki embedding κ^(z)_p(a) on a matrix algebra
    Lp {
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        #[arg(long)]
        density: Option<String>,
        /// Exponent in [1/2, inf]
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Interpolation parameter in [-1, 1]
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z: f64,
    },
    /// GNS L_p-module axioms and Cauchy–Schwarz on random elements
    Gnsmod {
        /// depolarizing:λ or schur-gaussian:t
        #[arg(long, default_value = "depolarizing:0.5")]
        map: String,
        #[arg(long)]
        density: Option<String>,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
    /// Transference homomorphism and its intertwining with a multiplier
    Transfer {
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        #[arg(long, default_value = "heat:1")]
        symbol: String,
        /// Also compare the BMO norms of x and its transference
        #[arg(long)]
        bmo: bool,
    },
    /// Dilation identity E_m(π_k(x)) = π_m(Φ_{ε(k−m)}(x)) on the truncation
    Dilate {
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Dilation depth d
        #[arg(long, default_value_t = 2)]
        steps: usize,
        /// Filtration level m < d
        #[arg(long, default_value_t = 0)]
        filtration: usize,
    },
    /// Run a property suite and report every invariant with its defect
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Kernel width for the dilation suite
        #[arg(long, default_value_t = 0.7)]
        eps: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupKind {
    Depolarizing,
    Schur,
    Torus,
    Suq2,
}

/// Result payload, pass/fail verdict and the CSV view of a run.
pub struct Outcome {
    pub result: Value,
    pub passed: bool,
    pub table: Table,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Haar { element } => haar(cfg, element),
        Command::Peterweyl { l, cross } => peterweyl(l, cross.as_deref()),
        Command::Multiplier { symbol, l_max } => multiplier(cfg, symbol, l_max),
        Command::Bmo {
            semigroup,
            element,
            density,
            project,
        } => bmo(cfg, *semigroup, element, density.as_deref(), *project),
        Command::Lp { element, density, p, z } => lp(element, density.as_deref(), *p, *z),
        Command::Gnsmod {
            map,
            density,
            dim,
            p,
            instances,
        } => gnsmod(cfg, map, density.as_deref(), *dim, *p, *instances),
        Command::Transfer { element, symbol, bmo } => transfer(cfg, element, symbol, *bmo),
        Command::Dilate {
            element,
            eps,
            steps,
            filtration,
        } => dilate(cfg, element, *eps, *steps, *filtration),
        Command::Verify { suite, eps } => verify::run(cfg, *suite, *eps),
    }
}

fn haar(cfg: &RunConfig, element: &str) -> Result<Outcome> {
    let x = specs::element(element)?;
    let exact = ExactSUq2::exact().haar(&x);
    let value = exact
        .eval(cfg.q)
        .ok_or_else(|| anyhow!("Haar value {exact} has a pole at q = {}", cfg.q))?;
    let direct = NumericSUq2::numeric(cfg.q)?.haar(&x.evaluate_at(cfg.q)?);
    let defect = (direct - Complex::new(value, 0.0)).norm();
    let passed = defect <= 1e-10 * value.abs().max(1.0);
    let mut table = Table::new(&["element", "exact", "value", "numeric_re", "numeric_im", "defect"]);
    table.push(vec![
        x.to_string(),
        exact.to_string(),
        value.to_string(),
        direct.re.to_string(),
        direct.im.to_string(),
        defect.to_string(),
    ]);
    Ok(Outcome {
        result: json!({
            "element": x.to_string(),
            "exact": exact.to_string(),
            "value": value,
            "numeric": { "re": direct.re, "im": direct.im },
            "defect": defect,
        }),
        passed,
        table,
    })
}

fn spin(s: &str) -> Result<HalfInt> {
    let l: HalfInt = s.parse()?;
    let l = HalfInt::spin(l.twice())?;
    if l.twice() > MAX_TWICE_L {
        return Err(Error::LabelBudget(l.to_string(), "3".into()).into());
    }
    Ok(l)
}

fn peterweyl(l: &str, cross: Option<&str>) -> Result<Outcome> {
    let l = spin(l)?;
    let alg = ExactSUq2::exact();
    let u = corep_matrix(&alg, l)?;
    let n = u.dim();
    let matrix: Vec<Vec<String>> = (0..n).map(|a| (0..n).map(|b| u.at(a, b).to_string()).collect()).collect();
    let orth = orthogonality_gram(&alg, &u, &u);
    let diagonal = orth.diagonal.clone().unwrap_or_default();
    let norm = derive_normalization(&diagonal);
    let eig = eigenvalue_check(&alg, &u, QScalar::q_pow)?;

    let mut passed = orth.delta_pattern && norm.is_some();
    let strings = |v: &[QScalar]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
    let normalization = norm.as_ref().map(|nm| {
        json!({ "rho": strings(&nm.rho), "constants": strings(&nm.constants) })
    });
    let cross_report = match cross {
        Some(l2) => {
            let l2 = spin(l2)?;
            let v = corep_matrix(&alg, l2)?;
            let c = orthogonality_gram(&alg, &u, &v);
            let nonzero: usize = c.gram.iter().flatten().filter(|g| !is_exact_zero(g)).count();
            passed &= c.delta_pattern;
            Some(json!({ "l2": l2.to_string(), "delta_pattern": c.delta_pattern, "nonzero_entries": nonzero }))
        }
        None => None,
    };

    let mut table = Table::new(&["i", "j", "entry", "stratum", "gram_diagonal"]);
    for (a, i) in l.indices().enumerate() {
        for (b, j) in l.indices().enumerate() {
            table.push(vec![
                i.to_string(),
                j.to_string(),
                matrix[a][b].clone(),
                eig[a][b].to_string(),
                diagonal[a][b].to_string(),
            ]);
        }
    }
    Ok(Outcome {
        result: json!({
            "l": l.to_string(),
            "dim": n,
            "matrix": matrix,
            "orthogonality": {
                "delta_pattern": orth.delta_pattern,
                "diagonal": diagonal.iter().map(|r| strings(r)).collect::<Vec<_>>(),
            },
            "normalization": normalization,
            "eigenvalue_table": eig,
            "cross": cross_report,
        }),
        passed,
        table,
    })
}

fn is_exact_zero(x: &QScalar) -> bool {
    x.numerator().is_zero()
}

fn multiplier(cfg: &RunConfig, symbol: &str, l_max: &str) -> Result<Outcome> {
    let sym = specs::symbol(symbol)?;
    let l_max = spin(l_max)?;
    let r = l2_multiplier_bound(cfg.q, &sym, l_max)?;
    let mut table = Table::new(&["stratum", "re", "im", "modulus"]);
    for k in &r.strata {
        let m = sym.eval(*k);
        table.push(vec![k.to_string(), m.re.to_string(), m.im.to_string(), m.norm().to_string()]);
    }
    Ok(Outcome {
        passed: r.holds,
        result: json!({ "symbol": symbol, "l_max": l_max.to_string(), "bound": r }),
        table,
    })
}

/// Adds the projection hint to a refusal of an element outside `M°`.
fn circ_hint(e: Error) -> anyhow::Error {
    match e {
        Error::NotCirc(_) => anyhow!("{e}\nhint: pass --project to subtract the fixed-point component"),
        e => e.into(),
    }
}

fn bmo_of<S: MarkovSemigroup<f64>>(sg: &S, x: S::Elem, project: bool, grid: &TGrid) -> Result<BmoPair> {
    let x = if project { project_circ(sg, &x) } else { x };
    bmo_norm(sg, &x, grid).map_err(circ_hint)
}

fn bmo(cfg: &RunConfig, kind: SemigroupKind, element: &str, density: Option<&str>, project: bool) -> Result<Outcome> {
    let grid = &cfg.t_grid;
    let mut rng = rng(cfg.seed);
    if density.is_some() && matches!(kind, SemigroupKind::Torus | SemigroupKind::Suq2) {
        bail!("--density only applies to the depolarizing and schur semigroups");
    }
    let (pair, validation, extra) = match kind {
        SemigroupKind::Depolarizing | SemigroupKind::Schur => {
            let x = specs::matrix(element)?;
            let alg = specs::density(density, x.nrows())?;
            if kind == SemigroupKind::Depolarizing {
                let sg = Depolarizing::new(alg);
                let pair = bmo_of(&sg, x, project, grid)?;
                (pair, Semigroup::Depolarizing(sg).validate(&mut rng), Value::Null)
            } else {
                let sg = SchurSemigroup::gaussian(alg)?;
                let pair = bmo_of(&sg, x, project, grid)?;
                (pair, Semigroup::Schur(sg).validate(&mut rng), Value::Null)
            }
        }
        SemigroupKind::Torus => {
            let sg = TorusHeat {
                circle_samples: cfg.torus_samples,
            };
            let f = specs::trig(element)?;
            let f = if project { project_circ(&sg, &f) } else { f };
            let r = torus_bmo_norm(&f, grid, cfg.torus_samples).map_err(circ_hint)?;
            // commutative, so the row seminorm equals the column one
            let pair = BmoPair {
                col: r.report.clone(),
                row: r.report.clone(),
                norm: r.report.norm,
            };
            let validation = Semigroup::<f64>::TorusHeat(sg).validate(&mut rng);
            (pair, validation, json!({ "sampling_error_bound": r.sampling_error_bound }))
        }
        SemigroupKind::Suq2 => {
            let rep = TruncRep::new(cfg.trunc_n, cfg.trunc_m, cfg.q)?;
            let sg = Suq2Heat::new(rep)?;
            let x = specs::numeric_element(element, cfg.q)?;
            let pair = bmo_of(&sg, x, project, grid)?;
            (pair, Semigroup::Suq2Heat(sg).validate(&mut rng), Value::Null)
        }
    };
    let passed = pair.col.stable && pair.row.stable && validation.passes(1e-10);
    let mut table = Table::new(&["side", "norm", "argmax_t", "refined_norm", "relative_change", "stable"]);
    for (side, r) in [("col", &pair.col), ("row", &pair.row)] {
        table.push(vec![
            side.into(),
            r.norm.to_string(),
            r.argmax_t.map_or("inf".into(), |t| t.to_string()),
            r.refined_norm.to_string(),
            r.relative_change.to_string(),
            r.stable.to_string(),
        ]);
    }
    Ok(Outcome {
        result: json!({
            "semigroup": kind,
            "element": element,
            "projected": project,
            "norm": pair.norm,
            "bmo": pair,
            "validation": validation,
            "torus": extra,
        }),
        passed,
        table,
    })
}

fn lp(element: &str, density: Option<&str>, p: f64, z: f64) -> Result<Outcome> {
    if !(-1.0..=1.0).contains(&z) {
        bail!("z must lie in [-1, 1], got {z}");
    }
    let a = specs::matrix(element)?;
    let alg = specs::density(density, a.nrows())?;
    let pe = Exponent::new(p)?;
    let v = alg.embed(&a, pe, z);
    let norm = v.norm();
    let op = spectral_norm(&a);
    let mut table = Table::new(&["p", "norm"]);
    let mut profile = Vec::new();
    let mut ps = vec![1.0, 2.0, 4.0, f64::INFINITY];
    if !ps.contains(&p) {
        ps.push(p);
        ps.sort_by(f64::total_cmp);
    }
    for q in ps {
        let n = alg.embed(&a, Exponent::new(q)?, z).norm();
        table.push(vec![q.to_string(), n.to_string()]);
        profile.push(json!({ "p": if q.is_finite() { json!(q) } else { json!("inf") }, "norm": n }));
    }
    // ‖κ_p(a)‖_p ≤ ‖a‖_∞ needs a genuine norm, so only p ≥ 1
    let contraction = (p >= 1.0).then_some(norm <= op * (1.0 + 1e-10) + 1e-12);
    let trace_defect = (p == 1.0).then(|| (trace(&v.carrier) - alg.state(&a)).norm());
    let convexity = alg.log_convexity_defects(&a, 9)?.into_iter().fold(0.0f64, f64::max).max(0.0);
    let passed = contraction.unwrap_or(true) && trace_defect.is_none_or(|d| d <= 1e-12) && convexity <= 1e-9;
    Ok(Outcome {
        result: json!({
            "p": if p.is_finite() { json!(p) } else { json!("inf") },
            "z": z,
            "norm": norm,
            "operator_norm": op,
            "contraction": contraction,
            "trace_defect": trace_defect,
            "log_convexity_defect": convexity,
            "profile": profile,
        }),
        passed,
        table,
    })
}

fn gnsmod(cfg: &RunConfig, map: &str, density: Option<&str>, dim: usize, p: f64, instances: usize) -> Result<Outcome> {
    if dim == 0 {
        bail!("--dim must be positive");
    }
    let alg = specs::density(density, dim)?;
    let phi = specs::ucp(map, alg)?;
    let pe = Exponent::new(p)?;
    let nulls = null_space(&phi);
    let ps = [1.0, 2.0, 4.0, 8.0, f64::INFINITY];
    let mut rng = rng(cfg.seed);
    let mut table = Table::new(&[
        "instance",
        "positivity",
        "definiteness",
        "adjoint_symmetry",
        "covariance",
        "cs_lhs",
        "cs_rhs",
        "profile_monotone",
    ]);
    let mut passed = true;
    let mut worst_sym = 0.0f64;
    let mut worst_cov = 0.0f64;
    let mut min_pos = f64::INFINITY;
    for i in 0..instances {
        let z = GnsElement::random(&mut rng, dim, 3);
        let w = GnsElement::random(&mut rng, dim, 3);
        let a = random_matrix::<f64, _>(&mut rng, dim, dim);
        let ax = axiom_check(&phi, &z, &w, &a, pe, &nulls);
        let cs = cauchy_schwarz_factor(&phi, &z, &w, pe);
        let profile = norm_profile(&phi, &z, &ps)?;
        let monotone = profile.windows(2).all(|x| x[1].1 >= x[0].1 * (1.0 - 1e-10) - 1e-12);
        passed &= ax.holds(1e-8) && cs.holds && monotone;
        worst_sym = worst_sym.max(ax.adjoint_symmetry);
        worst_cov = worst_cov.max(ax.covariance);
        min_pos = min_pos.min(ax.positivity);
        table.push(vec![
            i.to_string(),
            ax.positivity.to_string(),
            ax.definiteness.to_string(),
            ax.adjoint_symmetry.to_string(),
            ax.covariance.to_string(),
            cs.lhs.to_string(),
            cs.rhs.to_string(),
            monotone.to_string(),
        ]);
    }
    let worst = json!({ "adjoint_symmetry": worst_sym, "covariance": worst_cov, "min_positivity": min_pos.min(0.0) });
    Ok(Outcome {
        result: json!({
            "map": map,
            "dim": dim,
            "p": if p.is_finite() { json!(p) } else { json!("inf") },
            "instances": instances,
            "null_space_dim": nulls.len(),
            "map_defects": phi.defects(),
            "worst": worst,
        }),
        passed,
        table,
    })
}

fn transfer(cfg: &RunConfig, element: &str, symbol: &str, with_bmo: bool) -> Result<Outcome> {
    let rep = TruncRep::new(cfg.trunc_n, cfg.trunc_m, cfg.q)?;
    let sample = TorusSample::new(cfg.torus_samples)?;
    let x = specs::numeric_element(element, cfg.q)?;
    let sym = specs::symbol(symbol)?;
    let r = transference_intertwine(&rep, &sample, &sym, &x)?;
    let mut passed = r.defect <= 1e-10 && r.conjugation_defect <= 1e-10;
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["intertwining_defect".into(), r.defect.to_string()]);
    table.push(vec!["conjugation_defect".into(), r.conjugation_defect.to_string()]);
    let bmo_report = if with_bmo {
        let source = bmo_norm(&Suq2Heat::new(rep.clone())?, &x, &cfg.t_grid).map_err(circ_hint)?;
        let heat = TensorHeat::new(rep, sample)?;
        let image = bmo_s_norm(&heat, &cfg.t_grid, &PolTorusField::transference(&x))?;
        let rel = (source.norm - image.norm).abs() / source.norm.max(1e-300);
        passed &= rel <= 1e-4 || source.norm == image.norm;
        table.push(vec!["bmo_source".into(), source.norm.to_string()]);
        table.push(vec!["bmo_transference".into(), image.norm.to_string()]);
        Some(json!({ "source": source, "transference": image, "relative_difference": rel }))
    } else {
        None
    };
    Ok(Outcome {
        result: json!({ "element": element, "symbol": symbol, "intertwine": r, "bmo": bmo_report }),
        passed,
        table,
    })
}

fn dilate(cfg: &RunConfig, element: &str, eps: f64, steps: usize, m: usize) -> Result<Outcome> {
    if m >= steps {
        bail!("--filtration {m} must be below --steps {steps}");
    }
    let rep = TruncRep::new(cfg.trunc_n, cfg.trunc_m, cfg.q)?;
    let state = DilationState::new(rep, eps, steps).map_err(|e| match e {
        Error::Budget(..) => anyhow!("{e}\nhint: lower --trunc-n or --steps (the Fock space has 2^(N·d) states)"),
        e => e.into(),
    })?;
    let x = specs::numeric_element(element, cfg.q)?;
    let mut table = Table::new(&["m", "k", "interior_defect", "full_defect", "state_defect"]);
    let mut checks = Vec::new();
    let mut passed = true;
    for k in m + 1..=steps {
        let r = state.dilation_identity_check(m, k, &x)?;
        let sd = state.state_preservation_defect(k, &x)?;
        passed &= r.interior_defect <= 1e-8 && sd <= 1e-10;
        table.push(vec![
            m.to_string(),
            k.to_string(),
            r.interior_defect.to_string(),
            r.full_defect.to_string(),
            sd.to_string(),
        ]);
        checks.push(json!({ "identity": r, "state_defect": sd }));
    }
    Ok(Outcome {
        result: json!({
            "element": element,
            "eps": eps,
            "steps": steps,
            "filtration": m,
            "total_dim": state.total_dim(),
            "checks": checks,
        }),
        passed,
        table,
    })
}
