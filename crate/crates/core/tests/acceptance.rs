//! Acceptance criteria, one test per criterion. Each test writes a single
//! `PASS`/`FAIL` line to stderr (bypassing output capture) and fails on `FAIL`.

use nalgebra::DVector;
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use suq2_bmo::bmo::{
    bmo_dominates_l2, bmo_norm, expectation_bmo_contraction, project_circ, Depolarizing, Semigroup, SchurSemigroup, Suq2Heat, TGrid,
    TorusHeat,
};
use suq2_bmo::dilation::{build_fields, schur_form_check, DilationState, GramKernel};
use suq2_bmo::fdlp::{holder_check, trace_duality, BlockSubalgebra, Exponent, FdAlgebra};
use suq2_bmo::gnsmod::{axiom_check, cauchy_schwarz_factor, duality_pair, null_space, norm_profile, psi_embedding_check, GnsElement, ModularUcp};
use suq2_bmo::linalg;
use suq2_bmo::peterweyl::{corep_matrix, derive_normalization, eigenvalue_check, orthogonality_gram, unitarity_defects, HalfInt};
use suq2_bmo::polalg::{PolElement, SUq2, Symbol};
use suq2_bmo::scalar::{max_abs, CMatrix};
use suq2_bmo::trunc::{bmo_s_norm, l2_multiplier_bound, transference_intertwine, transference_map, PolTorusField, TensorHeat, TorusSample, TruncRep};
use suq2_bmo::QScalar;

type M = CMatrix<f64>;
type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn run(id: u32, name: &str, body: impl FnOnce() -> Outcome) {
    let outcome = body();
    let line = match &outcome {
        Ok(d) => format!("PASS [{id:>2}] {name}: {d}"),
        Err(e) => format!("FAIL [{id:>2}] {name}: {e}"),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    if let Err(e) = outcome {
        panic!("criterion {id} ({name}) failed: {e}");
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

fn h(twice: i64) -> HalfInt {
    HalfInt::from_twice(twice)
}

fn diag(v: &[f64]) -> M {
    M::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|x| c(*x))))
}

fn random_diag_density(rng: &mut ChaCha8Rng, n: usize) -> M {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    diag(&w.iter().map(|x| x / s).collect::<Vec<_>>())
}

/// A density `U (D_1 ⊕ D_2) U*` together with the block subalgebra it leaves invariant.
fn invariant_pair(rng: &mut ChaCha8Rng, blocks: &[usize]) -> (FdAlgebra<f64>, BlockSubalgebra<f64>) {
    let n: usize = blocks.iter().sum();
    let u = linalg::random_unitary::<f64, _>(rng, n);
    let weights: Vec<f64> = blocks.iter().map(|_| rng.gen_range(0.3..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let parts: Vec<M> = blocks
        .iter()
        .zip(&weights)
        .map(|(b, w)| linalg::random_density::<f64, _>(rng, *b, 0.5).map(|z| z * (w / total)))
        .collect();
    let d = linalg::hermitian_part(&(&u * linalg::direct_sum(&parts) * u.adjoint()));
    (FdAlgebra::new(d).unwrap(), BlockSubalgebra::new(u, blocks.to_vec()).unwrap())
}

fn mono_set(alg: &SUq2<Complex<f64>>) -> Vec<PolElement<Complex<f64>>> {
    let mut out = Vec::new();
    for k in -2i64..=2 {
        for l in 0..=2u32 {
            for m in 0..=2u32 {
                out.push(alg.mono(k, l, m));
            }
        }
    }
    out
}

fn random_table(rng: &mut ChaCha8Rng, range: std::ops::RangeInclusive<i64>) -> Symbol<f64> {
    Symbol::Table {
        values: range.map(|k| (k, Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect(),
        default: Complex::new(rng.gen_range(-1.0..1.0), 0.0),
    }
}

#[test]
fn criterion_01_algebra_relations() {
    run(1, "algebra relations", || {
        let exact = SUq2::exact();
        for (name, d) in exact.relation_defects() {
            ensure!(d.is_zero(), "exact relation {name} leaves {d}");
        }
        let mut worst = 0.0f64;
        for q in [0.3, -0.3, 0.7, -0.7] {
            let rep = TruncRep::new(16, 8, q).map_err(err)?;
            let d = rep.relation_defects().max_interior();
            ensure!(d <= 1e-12, "interior defect {d:e} at q = {q}");
            worst = worst.max(d);
        }
        Ok(format!("5 exact identities; interior defect ≤ {worst:.1e} at N=16, M=8"))
    });
}

/// `[n, k]_x` by the q-Pascal recursion.
fn pascal(n: u32, k: u32, x: &QScalar) -> QScalar {
    if k == 0 || k == n {
        return QScalar::one();
    }
    pascal(n - 1, k - 1, x) + x.pow(k) * pascal(n - 1, k, x)
}

#[test]
fn criterion_02_peter_weyl_orthogonality() {
    run(2, "Haar/Peter-Weyl orthogonality", || {
        let a = SUq2::exact();
        let us: Vec<_> = (0..=6).map(|t| corep_matrix(&a, h(t))).collect::<Result<_, _>>().map_err(err)?;
        let q2: QScalar = "q^2".parse().map_err(err)?;
        let mut pairs = 0;
        for u in &us {
            for v in &us {
                let r = orthogonality_gram(&a, u, v);
                ensure!(r.delta_pattern, "Gram of l={} vs l'={} is not δ-diagonal", u.l(), v.l());
                pairs += 1;
                let Some(diagonal) = r.diagonal else { continue };
                let norm = derive_normalization(&diagonal).ok_or(format!("no (l,i)-only normalization at l={}", u.l()))?;
                let n = u.dim();
                for i in 0..n {
                    for j in 0..n {
                        let rescaled = norm.rho[i].clone() / norm.rho[j].clone() * diagonal[i][j].clone();
                        ensure!(rescaled == norm.constants[i], "C depends on j at l={}, ({i},{j})", u.l());
                    }
                }
                let t = u.l().twice();
                for (pos, j) in u.l().indices().enumerate() {
                    let (lp, lm) = ((t + j.twice()) / 2, (t - j.twice()) / 2);
                    let want = QScalar::q_pow(-2 * lp * lm) * pascal(t as u32, lp as u32, &q2);
                    ensure!(norm.rho[pos] == want, "normalization at l={}, j={j} is not the q²-binomial", u.l());
                }
                ensure!(unitarity_defects(&a, u, &norm.rho).is_empty(), "rescaled l={} is not unitary", u.l());
                let total = norm.constants.iter().fold(QScalar::zero(), |s, x| s + x.clone());
                ensure!(total == QScalar::one(), "constants at l={} sum to {total}", u.l());
            }
        }
        Ok(format!("{pairs} pairs l,l' ≤ 3 exactly δ-diagonal; C_i^(l) depends on (l,i) only"))
    });
}

#[test]
fn criterion_03_fourier_schur_eigenvalues() {
    run(3, "Fourier-Schur eigenvalue law", || {
        let a = SUq2::exact();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let us: Vec<_> = (0..=6).map(|t| corep_matrix(&a, h(t))).collect::<Result<_, _>>().map_err(err)?;
        for s in 0..20 {
            let table: Vec<QScalar> = (-3..=3)
                .map(|_| QScalar::rational(rng.gen_range(-40..=40), rng.gen_range(1..=17)))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            let sym = |k: i64| if (-3..=3).contains(&k) { table[(k + 3) as usize].clone() } else { QScalar::zero() };
            for u in &us {
                let kk = eigenvalue_check(&a, u, sym).map_err(|e| format!("symbol {s}: {e}"))?;
                for (r, i) in u.l().indices().enumerate() {
                    for (col, j) in u.l().indices().enumerate() {
                        ensure!(kk[r][col] == -(i.twice() + j.twice()) / 2, "wrong stratum at l={}", u.l());
                    }
                }
            }
        }
        Ok("20 random bounded symbols, l ≤ 3, exact".into())
    });
}

#[test]
fn criterion_04_l2_bound() {
    run(4, "L2 multiplier bound", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst = 0.0f64;
        let mut count = 0;
        for q in [0.3, 0.5, 0.8, -0.6] {
            let mut symbols = vec![Symbol::heat(0.4), Symbol::heat(2.0), Symbol::indicator(&[-1, 2])];
            for _ in 0..4 {
                symbols.push(random_table(&mut rng, -3..=3));
            }
            for sym in &symbols {
                let r = l2_multiplier_bound(q, sym, h(6)).map_err(|e| format!("q={q}: {e}"))?;
                let rel = (r.norm - r.strata_max).abs() / r.strata_max.max(1e-300);
                ensure!(rel <= 1e-8, "q={q}: norm {} vs max |m(k)| {} over {:?}", r.norm, r.strata_max, r.strata);
                ensure!(r.strata_max <= r.sup_norm + 1e-12, "q={q}: strata max exceeds ‖m‖_∞");
                worst = worst.max(rel);
                count += 1;
            }
        }
        Ok(format!("{count} symbols: ‖T̃_m‖ = max|m(k)| ≤ ‖m‖_∞, rel. gap ≤ {worst:.1e}"))
    });
}

#[test]
fn criterion_05_transference() {
    run(5, "transference", || {
        let q = 0.5;
        let a = SUq2::numeric(q).map_err(err)?;
        let rep = TruncRep::new(8, 3, q).map_err(err)?;
        let s = TorusSample::new(256).map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut symbols: Vec<Symbol<f64>> = (0..3).map(|_| random_table(&mut rng, -2..=2)).collect();
        symbols.push(Symbol::indicator(&[0, 1]));
        let (mut pi_def, mut lem_def, mut heat_def) = (0.0f64, 0.0f64, 0.0f64);
        for x in mono_set(&a) {
            let k = x.terms().next().map(|(m, _)| m.k).unwrap_or(0);
            let f = transference_map(&rep, &s, &x).map_err(err)?;
            let ex = rep.evaluate(&x);
            for (i, fi) in f.field.samples.iter().enumerate() {
                let want = ex.map(|v| v * s.zeta(i, k));
                pi_def = pi_def.max(rep.on_interior(&(fi - want)).norm());
            }
            pi_def = pi_def.max(f.conjugation_defect);
            for sym in &symbols {
                lem_def = lem_def.max(transference_intertwine(&rep, &s, sym, &x).map_err(err)?.defect);
            }
            for t in [0.1, 1.0, 5.0] {
                heat_def = heat_def.max(transference_intertwine(&rep, &s, &Symbol::heat(t), &x).map_err(err)?.defect);
            }
        }
        ensure!(pi_def <= 1e-10, "formula for π: interior defect {pi_def:e}");
        ensure!(lem_def <= 1e-10, "multiplier intertwining: interior defect {lem_def:e}");
        ensure!(heat_def <= 1e-10, "π∘Φ_t = S_t∘π: interior defect {heat_def:e}");
        Ok(format!("45 monomials, S=256: π {pi_def:.1e}, T_m {lem_def:.1e}, heat {heat_def:.1e}"))
    });
}

#[test]
fn criterion_06_bmo_isometry() {
    run(6, "BMO isometry of π", || {
        let q = 0.5;
        let rep = TruncRep::new(6, 2, q).map_err(err)?;
        let heat = TensorHeat::new(rep.clone(), TorusSample::new(256).map_err(err)?).map_err(err)?;
        let pol = Suq2Heat::new(rep).map_err(err)?;
        let a = &heat.alg;
        let grid = TGrid::default();
        let mut worst = 0.0f64;
        let mut values = Vec::new();
        for x in [a.alpha(), a.pow(&a.alpha(), 2), a.mul(&a.alpha(), &a.gamma())] {
            let lhs = bmo_norm(&pol, &x, &grid).map_err(err)?.norm;
            let rhs = bmo_s_norm(&heat, &grid, &PolTorusField::transference(&x)).map_err(err)?.norm;
            let rel = (lhs - rhs).abs() / lhs.max(1e-300);
            ensure!(rel <= 1e-4, "x = {x}: Pol side {lhs}, tensor side {rhs}");
            worst = worst.max(rel);
            values.push(format!("{lhs:.6}"));
        }
        Ok(format!("‖x‖_BMO = [{}], rel. mismatch ≤ {worst:.1e}", values.join(", ")))
    });
}

#[test]
fn criterion_07_markov_axioms() {
    run(7, "Markov semigroup axioms", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut fams: Vec<Semigroup<f64>> = Vec::new();
        for n in [3, 4] {
            let d = random_diag_density(&mut rng, n);
            fams.push(Semigroup::Schur(SchurSemigroup::gaussian(FdAlgebra::new(d).unwrap()).map_err(err)?));
            let d = linalg::random_density::<f64, _>(&mut rng, n, 0.3);
            fams.push(Semigroup::Depolarizing(Depolarizing::new(FdAlgebra::new(d).map_err(err)?)));
        }
        fams.push(Semigroup::TorusHeat(TorusHeat::default()));
        for q in [0.5, -0.3] {
            fams.push(Semigroup::Suq2Heat(Suq2Heat::new(TruncRep::new(6, 2, q).map_err(err)?).map_err(err)?));
        }
        let mut kinds = std::collections::BTreeSet::new();
        let mut worst = 0.0f64;
        for f in &fams {
            let r = f.validate(&mut rng);
            ensure!(r.passes(1e-10), "{r:?}");
            worst = worst.max(r.unitality).max(r.positivity).max(r.symmetry).max(r.semigroup_law);
            kinds.insert(f.kind());
        }
        ensure!(kinds.len() == 4, "only {kinds:?} exercised");
        Ok(format!("{} instances over {kinds:?}, worst defect {worst:.1e}", fams.len()))
    });
}

#[test]
fn criterion_08_bmo_inequalities() {
    run(8, "BMO inequalities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = TGrid::default();
        let mut min_slack = f64::INFINITY;
        let (mut tri, mut hom) = (0.0f64, 0.0f64);
        for i in 0..100 {
            let x = linalg::random_matrix::<f64, _>(&mut rng, 3, 3);
            let y = linalg::random_matrix::<f64, _>(&mut rng, 3, 3);
            let z = Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            macro_rules! body {
                ($sg:expr) => {{
                    let sg = $sg;
                    let (x, y) = (project_circ(&sg, &x), project_circ(&sg, &y));
                    let l2 = bmo_dominates_l2(&sg, &x, &grid).map_err(err)?;
                    ensure!(l2.holds, "instance {i}: {l2:?}");
                    min_slack = min_slack.min(l2.bmo_col - l2.l2_col).min(l2.bmo_row - l2.l2_row);
                    let (nx, ny) = (bmo_norm(&sg, &x, &grid).map_err(err)?.norm, bmo_norm(&sg, &y, &grid).map_err(err)?.norm);
                    let nxy = bmo_norm(&sg, &(&x + &y), &grid).map_err(err)?.norm;
                    ensure!(nxy <= nx + ny + 1e-8, "instance {i}: triangle {nxy} > {nx} + {ny}");
                    tri = tri.max(nxy - nx - ny);
                    let nz = bmo_norm(&sg, &x.map(|v| v * z), &grid).map_err(err)?.norm;
                    let d = (nz - z.norm() * nx).abs();
                    ensure!(d <= 1e-8 * (1.0 + nz), "instance {i}: homogeneity defect {d:e}");
                    hom = hom.max(d);
                }};
            }
            if i % 2 == 0 {
                let d = random_diag_density(&mut rng, 3);
                body!(SchurSemigroup::gaussian(FdAlgebra::new(d).unwrap()).map_err(err)?);
            } else {
                let d = linalg::random_density::<f64, _>(&mut rng, 3, 0.3);
                body!(Depolarizing::new(FdAlgebra::new(d).map_err(err)?));
            }
        }
        let mut contraction = 0.0f64;
        for i in 0..100 {
            let x = linalg::random_matrix::<f64, _>(&mut rng, 4, 4);
            let r = if i % 2 == 0 {
                let d = random_diag_density(&mut rng, 4);
                let sg = SchurSemigroup::gaussian(FdAlgebra::new(d).unwrap()).map_err(err)?;
                let sub = if i % 4 == 0 { BlockSubalgebra::diagonal(4) } else { BlockSubalgebra::standard(vec![1, 3]).map_err(err)? };
                expectation_bmo_contraction(&sg, &sub, &project_circ(&sg, &x), &grid).map_err(err)?
            } else {
                let (alg, sub) = invariant_pair(&mut rng, &[2, 2]);
                let sg = Depolarizing::new(alg);
                expectation_bmo_contraction(&sg, &sub, &project_circ(&sg, &x), &grid).map_err(err)?
            };
            ensure!(r.holds, "instance {i}: ‖E x‖ = {} > ‖x‖ = {}", r.image.norm, r.source.norm);
            contraction = contraction.max(r.image.norm - r.source.norm);
        }
        Ok(format!(
            "100 M_3: min(BMO − L2) = {min_slack:.2e}, triangle excess ≤ {tri:.1e}, homogeneity ≤ {hom:.1e}; 100 expectations, max(‖Ex‖−‖x‖) = {contraction:.1e}"
        ))
    });
}

#[test]
fn criterion_09_order_lemmas() {
    run(9, "Kadison-Schwarz, comparison, majorization", || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ks = f64::INFINITY;
        for i in 0..100 {
            let blocks: &[usize] = if i % 2 == 0 { &[1, 2] } else { &[2, 2] };
            let (alg, sub) = invariant_pair(&mut rng, blocks);
            let a = linalg::random_matrix::<f64, _>(&mut rng, alg.dim(), alg.dim());
            let z = rng.gen_range(-1.0..=1.0);
            let g = alg.kadison_schwarz_gap(&sub, &a, z).map_err(err)?;
            ensure!(g >= -1e-10, "instance {i}: Kadison-Schwarz gap {g:e}");
            ks = ks.min(g);
        }
        let (mut round, mut agree, mut dominated) = (0.0f64, 0, 0);
        for i in 0..100 {
            let alg = FdAlgebra::new(linalg::random_density::<f64, _>(&mut rng, 3, 0.3)).map_err(err)?;
            let omega = if i % 2 == 0 {
                // a spectrum bounded away from 1 on either side
                let x0 = linalg::random_psd::<f64, _>(&mut rng, 3, 3);
                let top = linalg::max_eig(&x0);
                let target = if i % 4 == 0 { 0.9 } else { 1.1 };
                let h = alg.d_pow(0.5);
                linalg::hermitian_part(&(&h * x0.map(|v| v * (target / top)) * &h))
            } else {
                let scale = rng.gen_range(0.2..1.2);
                linalg::random_density::<f64, _>(&mut rng, 3, 0.3).map(|v| v * scale)
            };
            let r = alg.comparison_factor(&omega, 1e-10).map_err(err)?;
            let h = alg.d_pow(0.5);
            let back = max_abs(&(&h * &r.x * &h - &omega));
            ensure!(back <= 1e-12, "instance {i}: D^½ x D^½ differs from D_ω by {back:e}");
            round = round.max(back);
            ensure!(r.factor_verdict == r.direct_verdict, "instance {i}: verdicts differ ({r:?})");
            agree += 1;
            dominated += r.factor_verdict as usize;
        }
        let (mut lower, mut gap) = (f64::INFINITY, f64::INFINITY);
        for i in 0..100 {
            let alg = FdAlgebra::new(linalg::random_density::<f64, _>(&mut rng, 3, 0.3)).map_err(err)?;
            let x_b = linalg::random_psd::<f64, _>(&mut rng, 3, 3);
            let h = alg.d_pow(0.5);
            let b = linalg::hermitian_part(&(&h * &x_b * &h));
            let k = linalg::random_psd::<f64, _>(&mut rng, 3, 2);
            let shrink = rng.gen_range(0.0..1.0) / linalg::max_eig(&k);
            let k = k.map(|v| v * shrink);
            let rb = linalg::sqrt_psd(&b);
            let a = linalg::hermitian_part(&(&rb * k * &rb));
            let r = alg.majorize_factor(&a, &b, &x_b, 1e-10).map_err(|e| format!("instance {i}: {e}"))?;
            ensure!(r.lower >= -1e-10 && r.gap >= -1e-10, "instance {i}: x_a spectrum {} / gap {}", r.lower, r.gap);
            lower = lower.min(r.lower);
            gap = gap.min(r.gap);
        }
        Ok(format!(
            "min KS gap {ks:.1e}; comparison round trip ≤ {round:.1e}, {agree}/100 verdicts agree ({dominated} dominated); majorization min(x_a) {lower:.1e}, min(x_b − x_a) {gap:.1e}"
        ))
    });
}

fn gaussian_schur(n: usize, t: f64) -> M {
    M::from_fn(n, n, |i, j| c((-t * ((i as f64) - (j as f64)).powi(2)).exp()))
}

#[test]
fn criterion_10_gns_module() {
    run(10, "GNS module", || {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (mut cs_norm, mut psi, mut ax_worst) = (0.0f64, 0.0f64, 0.0f64);
        let mut total = 0;
        for n in [2usize, 3] {
            let d: Vec<f64> = (1..=n).map(|k| k as f64 / (n * (n + 1) / 2) as f64).collect();
            let maps = vec![
                ModularUcp::schur(FdAlgebra::new(diag(&d)).unwrap(), gaussian_schur(n, 0.4)).map_err(err)?,
                ModularUcp::depolarizing(FdAlgebra::new(linalg::random_density::<f64, _>(&mut rng, n, 0.3)).map_err(err)?, 0.6).map_err(err)?,
            ];
            for phi in &maps {
                let nulls = null_space(phi);
                for i in 0..100 {
                    let z = GnsElement::random(&mut rng, n, 2);
                    let w = GnsElement::random(&mut rng, n, 2);
                    let a = linalg::random_matrix::<f64, _>(&mut rng, n, n);
                    let p = rng.gen_range(2.0..6.0);
                    let pe = Exponent::Finite(p);
                    let ax = axiom_check(phi, &z, &w, &a, pe, &nulls);
                    ensure!(ax.holds(1e-10), "M_{n} instance {i}: {ax:?}");
                    ax_worst = ax_worst.max(ax.definiteness).max(ax.adjoint_symmetry).max(ax.covariance);
                    let cs = cauchy_schwarz_factor(phi, &z, &w, pe);
                    ensure!(cs.holds && cs.contraction_norm <= 1.0 + 1e-8, "M_{n} instance {i}: {cs:?}");
                    cs_norm = cs_norm.max(cs.contraction_norm);
                    let x = linalg::random_matrix::<f64, _>(&mut rng, n, n);
                    let y = linalg::random_matrix::<f64, _>(&mut rng, n, n);
                    let r = psi_embedding_check(phi, &x, &y, &z, p).map_err(err)?;
                    let prod = r.product_defect.ok_or("product identity skipped at p ≥ 2")?;
                    ensure!(prod <= 1e-10 && r.mixed_defect <= 1e-10, "M_{n} instance {i}: {r:?}");
                    psi = psi.max(prod).max(r.mixed_defect);
                    let d = duality_pair(phi, &z, pe, &w, Exponent::new(p / (p - 1.0)).map_err(err)?).map_err(err)?;
                    ensure!(d.holds, "M_{n} instance {i}: pairing {d:?}");
                    let prof = norm_profile(phi, &z, &[1.0, 2.0, p, 2.0 * p, f64::INFINITY]).map_err(err)?;
                    for win in prof.windows(2) {
                        ensure!(win[1].1 >= win[0].1 * (1.0 - 1e-12), "M_{n} instance {i}: module norms decrease {prof:?}");
                    }
                    total += 1;
                }
            }
        }
        Ok(format!("{total} instances: axioms ≤ {ax_worst:.1e}, max ‖T‖ = {cs_norm:.9}, Ψ identities ≤ {psi:.1e}"))
    });
}

#[test]
fn criterion_11_dilation() {
    run(11, "Markov dilation", || {
        let q = 0.5;
        let a = SUq2::numeric(q).map_err(err)?;
        let xs = [a.alpha(), a.gamma(), a.mul(&a.alpha(), &a.gamma()), a.mul(&a.gamma(), &a.gamma_star())];
        let mut worst = 0.0f64;
        let mut car = 0.0f64;
        for eps in [0.3, 0.7] {
            let st = DilationState::new(TruncRep::new(4, 1, q).map_err(err)?, eps, 2).map_err(err)?;
            for x in &xs {
                for (m, k) in [(0, 1), (0, 2), (1, 2)] {
                    let r = st.dilation_identity_check(m, k, x).map_err(err)?;
                    ensure!(r.interior_defect <= 1e-8, "ε={eps}, m={m}, k={k}, x={x}: {r:?}");
                    worst = worst.max(r.interior_defect);
                }
            }
            for n in 1..=4 {
                let d = build_fields(&GramKernel::new(eps, n).map_err(err)?).map_err(err)?.car_defects();
                ensure!(d.anticommutation <= 1e-12 && d.vacuum_covariance <= 1e-12 && d.self_adjoint <= 1e-12, "ε={eps}, n={n}: {d:?}");
                car = car.max(d.anticommutation).max(d.vacuum_covariance).max(d.self_adjoint);
            }
        }
        let rep = TruncRep::new(6, 2, q).map_err(err)?;
        let mut schur = 0.0f64;
        for t in [0.0, 0.3, 1.0, 4.0] {
            for x in &xs {
                let r = schur_form_check(&rep, t, x).map_err(err)?;
                ensure!(r.interior_defect <= 1e-10 && r.full_defect <= 1e-10, "t={t}, x={x}: {r:?}");
                schur = schur.max(r.full_defect);
            }
        }
        Ok(format!("E_m∘π_k = π_m∘Φ_ε(k−m) interior ≤ {worst:.1e} (dim 3072); CAR ≤ {car:.1e}; Schur form ≤ {schur:.1e}"))
    });
}

#[test]
fn criterion_12_kosaki_lp() {
    run(12, "Kosaki L_p layer", || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (mut star, mut prod, mut trace, mut contr) = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY);
        for i in 0..50 {
            let blocks: &[usize] = if i % 2 == 0 { &[1, 2] } else { &[2, 2] };
            let (alg, sub) = invariant_pair(&mut rng, blocks);
            let n = alg.dim();
            let e = alg.expectation(&sub).map_err(err)?;
            let a = linalg::random_matrix::<f64, _>(&mut rng, n, n);
            let b = linalg::random_matrix::<f64, _>(&mut rng, n, n);
            let z = rng.gen_range(-1.0..=1.0);
            for p in [1.0, 2.0, 4.0, f64::INFINITY] {
                let pe = Exponent::new(p).map_err(err)?;
                let v = alg.embed(&a, pe, z);
                let d = e.apply_lp(&v).norm() - v.norm();
                ensure!(d <= 1e-12 * v.norm().max(1.0), "instance {i}, p={p}: ‖E v‖_p exceeds ‖v‖_p by {d:e}");
                contr = contr.max(d);
                let bound = linalg::spectral_norm(&a);
                ensure!(v.norm() <= bound * (1.0 + 1e-12), "instance {i}, p={p}: ‖κ(a)‖_p > ‖a‖_∞");
            }
            let pos = linalg::random_psd::<f64, _>(&mut rng, n, n);
            let pe = Exponent::Finite(rng.gen_range(1.0..5.0));
            let image = e.apply_lp(&alg.embed(&pos, pe, 0.0)).carrier;
            ensure!(linalg::min_eig(&linalg::hermitian_part(&image)) >= -1e-12, "instance {i}: E is not positive on L_p");
            for p in [1.0, 1.5, 3.0, 8.0] {
                let s = alg.embed(&a, Exponent::Finite(p), z).carrier.adjoint() - alg.embed(&a.adjoint(), Exponent::Finite(p), -z).carrier;
                star = star.max(max_abs(&s));
                let pr = alg.embed(&a, Exponent::Finite(p), -1.0).carrier * alg.embed(&b, Exponent::Finite(p), 1.0).carrier
                    - alg.embed(&(&a * &b), Exponent::Finite(p / 2.0), 0.0).carrier;
                prod = prod.max(max_abs(&pr));
            }
            let tr = (alg.embed(&a, Exponent::Finite(1.0), z).carrier.trace() - alg.state(&a)).norm();
            trace = trace.max(tr);
        }
        ensure!(star <= 1e-12, "κ(x)* = κ(x*) defect {star:e}");
        ensure!(prod <= 1e-12, "product identity defect {prod:e}");
        ensure!(trace <= 1e-12, "trace preservation defect {trace:e}");
        let mut holder = 0;
        for i in 0..200 {
            let alg = FdAlgebra::new(linalg::random_density::<f64, _>(&mut rng, 3, 0.2)).map_err(err)?;
            let a = linalg::random_matrix::<f64, _>(&mut rng, 3, 3);
            let b = linalg::random_matrix::<f64, _>(&mut rng, 3, 3);
            let p = rng.gen_range(1.0..8.0);
            let q = if i % 2 == 0 { p / (p - 1.0) } else { rng.gen_range(p / (p - 1.0)..20.0) };
            let (pe, qe) = (Exponent::new(p).map_err(err)?, Exponent::new(q).map_err(err)?);
            let va = alg.embed(&a, pe, -1.0);
            let vb = alg.embed(&b, qe, 1.0);
            let r = holder_check(&va, &vb).map_err(err)?;
            ensure!(r.holds(1e-12 * r.rhs.max(1.0)), "triple {i}: ‖ac‖_r = {} > {}", r.lhs, r.rhs);
            if i % 2 == 0 {
                let d = trace_duality(&va, &vb).map_err(err)?;
                ensure!(d.holds(1e-12 * d.rhs.max(1.0)), "triple {i}: |Tr(xy)| = {} > {}", d.lhs, d.rhs);
            }
            holder += 1;
        }
        let mut convex = f64::NEG_INFINITY;
        for i in 0..50 {
            let alg = FdAlgebra::new(linalg::random_density::<f64, _>(&mut rng, 3, 0.2)).map_err(err)?;
            let a = linalg::random_matrix::<f64, _>(&mut rng, 3, 3);
            for d in alg.log_convexity_defects(&a, 5).map_err(err)? {
                ensure!(d <= 1e-9, "instance {i}: midpoint convexity defect {d:e}");
                convex = convex.max(d);
            }
        }
        Ok(format!(
            "E contractive in L_p (max excess {contr:.1e}); κ identities ≤ {:.1e}; trace ≤ {trace:.1e}; {holder} Hölder triples; log-convexity max defect {convex:.1e}",
            star.max(prod)
        ))
    });
}
