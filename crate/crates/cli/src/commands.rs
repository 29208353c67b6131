//! One function per subcommand, each producing a [`Report`].

use std::sync::Arc;

use serde_json::json;
use sew_core::entropy::{
    covering_profile, dual_volume_ratio, entropy_lower_bound, sandwich_holds, sobolev_entropy_lower,
    sobolev_entropy_upper, volume_ratio as radial_volume_ratio, Body,
};
use sew_core::harmonics::{
    kernel_section, nikolskii_check, random_point, BasisEvaluator, BasisSlice, BlockSelection,
};
use sew_core::norms::{dual_levy_mean, levy_mean as single_levy_mean, levy_means, InducedNorm};
use sew_core::sampling::{chunk_rng, sphere_directions};
use sew_core::spectra::{ratio_check, weyl_ratio};
use sew_core::widths::{
    allocate_ranks, approximation_sweep, bernstein_check as run_bernstein, envelope_deltas,
    ptj_check as run_ptj, sweep_slope, ApproxRule, SweepConfig,
};
use sew_core::{spectrum, ManifoldModel, Result, SewError, Spectrum};

use crate::report::{Cell, Report};
use crate::{
    AdditionArgs, BernsteinArgs, BlocksArgs, CoveringArgs, DualLevyArgs, EntropyArgs, LevyArgs,
    NikolskiiArgs, PtjArgs, RuleArg, SpectrumArgs, SweepArgs, VolumeArgs, WeylArgs,
};

const CONSTANTS_NOTE: &str = "formula bounds set the unspecified universal constants to 1";

fn grid_note(basis: &BasisSlice) -> String {
    format!("quadrature grid: {} nodes, exactness {}", basis.grid().len(), basis.grid().exactness())
}

pub fn spectrum_table(a: &SpectrumArgs) -> Result<Report> {
    let s = spectrum(a.manifold, a.n_max + 1)?;
    let mut r = Report::new(&["k", "eigenvalue", "multiplicity", "cumulative_dim", "theta_ratio", "tau_ratio"]);
    for k in 0..=a.n_max {
        let (theta, tau) = match ratio_check(&s, k) {
            Ok((t, u)) => (Cell::Float(t), Cell::Float(u)),
            Err(_) => (Cell::Text(String::new()), Cell::Text(String::new())),
        };
        r.row(vec![
            k.into(),
            s.eigenvalue_exact(k).into(),
            s.multiplicity(k).into(),
            s.cumulative_dim(k).into(),
            theta,
            tau,
        ]);
    }
    Ok(r)
}

/// Spectrum whose largest eigenvalue is at least `a`.
fn spectrum_reaching(model: ManifoldModel, a: f64) -> Result<Spectrum> {
    let mut n = (a.max(1.0).sqrt().ceil() as usize) + 2;
    loop {
        let s = spectrum(model, n)?;
        if s.eigenvalue(s.n_max()) >= a {
            return Ok(s);
        }
        n *= 2;
    }
}

pub fn weyl(a: &WeylArgs) -> Result<Report> {
    let top = a.a.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(SewError::Domain("thresholds must be positive".into()));
    }
    let s = spectrum_reaching(a.manifold, top)?;
    let mut r = Report::new(&["a", "count", "ratio"]);
    for &t in &a.a {
        r.row(vec![t.into(), s.counting_function(t).into(), weyl_ratio(&s, t)?.into()]);
    }
    Ok(r)
}

pub fn addition_check(a: &AdditionArgs) -> Result<Report> {
    let s = spectrum(a.manifold, a.max_degree)?;
    let mut rng = chunk_rng(a.common.seed, 0);
    let points: Vec<Vec<f64>> = (0..a.points).map(|_| random_point(a.manifold, &mut rng)).collect();
    let mut r = Report::new(&["k", "multiplicity", "max_rel_deviation"]);
    for k in 0..=a.max_degree {
        let ev = BasisEvaluator::new(a.manifold, BlockSelection::new(&s, vec![k])?)?;
        let dk = s.multiplicity(k) as f64;
        let worst = points.iter().fold(0.0f64, |m, x| {
            let sum: f64 = ev.eval(x).iter().map(|v| v * v).sum();
            m.max((sum - dk).abs() / dk)
        });
        r.row(vec![k.into(), s.multiplicity(k).into(), worst.into()]);
    }
    Ok(r)
}

pub fn nikolskii(a: &NikolskiiArgs) -> Result<Report> {
    let s = spectrum(a.manifold, a.max_degree)?;
    let sel = BlockSelection::contiguous(&s, a.min_degree, a.max_degree)?;
    let basis = BasisSlice::on_default_grid(a.manifold, &sel)?;
    let n = basis.dim();
    let mut rng = chunk_rng(a.common.seed, 0);
    let coeffs = sphere_directions(&mut rng, n, a.samples);
    let x0 = basis.grid().points()[0].clone();
    let section = kernel_section(basis.evaluator(), &x0);
    let mut r = Report::new(&["p", "q", "n", "max_ratio", "bound", "kernel_ratio", "holds"]);
    for &p in &a.p {
        for &q in &a.q {
            let mut worst = 0.0f64;
            let mut bound = 0.0;
            for c in coeffs.column_iter() {
                let (ratio, b) = nikolskii_check(c.as_slice(), &basis, p, q)?;
                worst = worst.max(ratio);
                bound = b;
            }
            let (kernel_ratio, _) = nikolskii_check(&section, &basis, p, q)?;
            let holds = worst <= bound * (1.0 + 1e-10) && kernel_ratio <= bound * (1.0 + 1e-10);
            r.row(vec![
                p.to_string().into(),
                q.to_string().into(),
                n.into(),
                worst.into(),
                bound.into(),
                kernel_ratio.into(),
                holds.into(),
            ]);
        }
    }
    r.note(grid_note(&basis));
    r.note("kernel section centered at the first grid node");
    Ok(r)
}

/// Blocks `1..=K` with `K` the least degree whose span has dimension at least `n`.
fn zero_mean_basis(model: ManifoldModel, n: usize) -> Result<(usize, Arc<BasisSlice>)> {
    if n == 0 {
        return Err(SewError::Domain("dimension must be positive".into()));
    }
    let s = spectrum(model, n)?;
    let degree = (1..=n).find(|&k| s.cumulative_dim(k) - 1 >= n).unwrap_or(n);
    let sel = BlockSelection::contiguous(&s, 1, degree)?;
    Ok((degree, Arc::new(BasisSlice::on_default_grid(model, &sel)?)))
}

pub fn levy_mean(a: &LevyArgs) -> Result<Report> {
    let mut r = Report::new(&["n", "degree", "p", "mean", "std_error"]);
    for &n in &a.n_sweep {
        let (degree, basis) = zero_mean_basis(a.manifold, n)?;
        let means = levy_means(&basis, &a.p, a.samples, a.common.seed)?;
        for (p, m) in a.p.iter().zip(means) {
            r.row(vec![
                basis.dim().into(),
                degree.into(),
                p.to_string().into(),
                m.mean.into(),
                m.std_error.into(),
            ]);
        }
    }
    Ok(r)
}

pub fn dual_levy(a: &DualLevyArgs) -> Result<Report> {
    let mut r = Report::new(&["n", "degree", "p", "mean", "std_error"]);
    for &n in &a.n_sweep {
        let (degree, basis) = zero_mean_basis(a.manifold, n)?;
        for &p in &a.p {
            let nm = InducedNorm::new(Arc::clone(&basis), p);
            let m = dual_levy_mean(&nm, a.samples, a.common.seed, a.tol)?;
            r.row(vec![
                basis.dim().into(),
                degree.into(),
                p.to_string().into(),
                m.mean.into(),
                m.std_error.into(),
            ]);
        }
    }
    Ok(r)
}

pub fn entropy_bounds(a: &EntropyArgs) -> Result<Report> {
    let mut r = Report::new(&["n", "lower", "upper", "ratio"]);
    for &n in &a.n_sweep {
        let lower = sobolev_entropy_lower(n, a.gamma, a.d, a.p, a.q)?;
        let upper = sobolev_entropy_upper(n, a.gamma, a.d, a.p, a.q)?;
        r.row(vec![n.into(), lower.into(), upper.into(), (upper / lower).into()]);
    }
    r.note(CONSTANTS_NOTE);
    Ok(r)
}

fn block_basis(model: ManifoldModel, blocks: &[usize]) -> Result<Arc<BasisSlice>> {
    let top = blocks.iter().copied().max().ok_or_else(|| {
        SewError::Configuration("at least one block is required".into())
    })?;
    let s = spectrum(model, top)?;
    let sel = BlockSelection::new(&s, blocks.to_vec())?;
    Ok(Arc::new(BasisSlice::on_default_grid(model, &sel)?))
}

pub fn covering(a: &CoveringArgs) -> Result<Report> {
    let basis = block_basis(a.manifold, &a.blocks)?;
    let n = basis.dim();
    let d = a.manifold.dim() as f64;
    let diag: Vec<f64> = match a.gamma {
        Some(g) => (1..=n).map(|l| (l as f64).powf(-g / d)).collect(),
        None => vec![1.0; n],
    };
    let detroot = diag.iter().product::<f64>().powf(1.0 / n as f64);
    let x = InducedNorm::new(Arc::clone(&basis), a.p);
    let y = InducedNorm::new(Arc::clone(&basis), a.q);
    let m_x = single_levy_mean(&x, a.levy_samples, a.common.seed.wrapping_add(1))?;
    let m_ydual = dual_levy_mean(&y, a.levy_samples, a.common.seed.wrapping_add(2), 1e-10)?;
    let k_max = a.k.iter().copied().max().unwrap_or(1);
    let budget = 1usize << (k_max.clamp(1, 40) - 1);
    let body = Body::Ball { norm: x, diag, samples: a.samples };
    let profile = covering_profile(&body, &y, &a.k, budget, a.common.seed)?;
    let mut r = Report::new(&["k", "centers", "cover_radius", "pack_points", "pack_radius", "formula_lower"]);
    for (cover, pack) in &profile {
        let formula = entropy_lower_bound(detroot, m_x.mean, m_ydual.mean, cover.k, n)?;
        r.row(vec![
            cover.k.into(),
            cover.centers.into(),
            cover.radius.into(),
            pack.centers.into(),
            pack.radius.into(),
            formula.into(),
        ]);
    }
    r.summary("n", n);
    r.summary("detroot", detroot);
    r.summary("levy_mean_x", m_x.mean);
    r.summary("dual_levy_mean_y", m_ydual.mean);
    r.summary("sandwich_holds", sandwich_holds(&profile));
    r.note(grid_note(&basis));
    r.note("cover and pack radii come from one farthest-point traversal of the sampled body");
    Ok(r)
}

pub fn volume_ratio(a: &VolumeArgs) -> Result<Report> {
    let basis = block_basis(a.manifold, &a.blocks)?;
    let mut r = Report::new(&["n", "p", "body", "ratio", "std_error", "levy_mean"]);
    for &p in &a.p {
        let nm = InducedNorm::new(Arc::clone(&basis), p);
        let m = single_levy_mean(&nm, a.samples, a.common.seed.wrapping_add(1))?;
        let (body, v) = if a.dual {
            ("polar", dual_volume_ratio(&nm, a.samples, a.common.seed, a.tol)?)
        } else {
            ("unit-ball", radial_volume_ratio(&nm, a.samples, a.common.seed)?)
        };
        r.row(vec![
            basis.dim().into(),
            p.to_string().into(),
            body.into(),
            v.ratio.into(),
            v.std_error.into(),
            m.mean.into(),
        ]);
    }
    r.note(grid_note(&basis));
    Ok(r)
}

pub fn width_blocks(a: &BlocksArgs) -> Result<Report> {
    let d = a.manifold.dim();
    let mut s = spectrum(a.manifold, 4 * a.n.max(1))?;
    let alloc = loop {
        match allocate_ranks(&s, a.n, a.gamma, d, a.q, a.epsilon) {
            Err(SewError::ExtendSpectrum { needed, .. }) => s = spectrum(a.manifold, needed)?,
            other => break other?,
        }
    };
    let check = alloc.check(&s);
    let deltas = envelope_deltas(&s, &alloc.boundaries, a.gamma);
    let mut r = Report::new(&["k", "lo", "hi", "dim", "rank"]);
    for k in 0..=alloc.blocks {
        let span = alloc.span(k);
        r.row(vec![
            k.into(),
            span.start.into(),
            span.end.into(),
            alloc.block_dims[k].into(),
            alloc.ranks[k].into(),
        ]);
    }
    r.summary("tau_n", alloc.tau_n);
    r.summary("blocks", alloc.blocks);
    r.summary("epsilon", alloc.epsilon);
    r.summary("budget", alloc.budget);
    r.summary("budget_ratio", alloc.budget_ratio());
    r.summary("sandwich", check.sandwich);
    r.summary("ranks_match_formula", check.ranks);
    r.summary("budget_is_rank_sum", check.budget);
    r.extra = Some(json!({ "allocation": alloc, "check": check, "envelope_deltas": deltas }));
    r.note("block 0 covers [1, N_1) with rank tau_N; block k covers [N_k, N_k+1)");
    Ok(r)
}

pub fn approximant_sweep(a: &SweepArgs) -> Result<Report> {
    let rule = match a.rule {
        RuleArg::Truncate => ApproxRule::Truncate,
        RuleArg::RandomSubspace => ApproxRule::RandomSubspace { draws: a.draws, seed: a.common.seed },
    };
    let cfg = SweepConfig {
        model: a.manifold,
        gamma: a.gamma,
        q: a.q,
        bases: a.bases.clone(),
        samples: a.samples,
        seed: a.common.seed,
        rule,
        epsilon: a.epsilon,
        truncation: a.truncation,
    };
    let points = approximation_sweep(&cfg)?;
    let mut r = Report::new(&["N", "tau_n", "budget", "sup_error", "mean_error"]);
    for p in &points {
        r.row(vec![p.base.into(), p.tau_n.into(), p.budget.into(), p.sup_error.into(), p.mean_error.into()]);
    }
    if points.len() >= 2 {
        r.summary("log_log_slope", sweep_slope(&points));
    }
    Ok(r)
}

pub fn ptj_check(a: &PtjArgs) -> Result<Report> {
    let rep = run_ptj(a.n, a.q_prime, a.lambda, a.trials, a.common.seed)?;
    let mut r = Report::new(&["trial", "constant", "meets_target"]);
    for (i, &c) in rep.constants.iter().enumerate() {
        r.row(vec![i.into(), c.into(), (c <= rep.target).into()]);
    }
    r.summary("s", rep.s);
    r.summary("levy_mean", rep.levy_mean);
    r.summary("target", rep.target);
    r.summary("min_constant", rep.min_constant);
    r.summary("max_constant", rep.max_constant);
    r.summary("fraction_meeting_target", rep.fraction_meeting_target);
    r.summary("exists", rep.exists);
    r.note("constants are estimated from sampled directions in each subspace");
    Ok(r)
}

pub fn bernstein_check(a: &BernsteinArgs) -> Result<Report> {
    let s = spectrum(a.manifold, a.m)?;
    let rep = run_bernstein(&s, a.m, a.gamma, a.q, a.samples, a.common.seed)?;
    let mut r = Report::new(&[
        "M",
        "n",
        "max_ratio",
        "top_block_deviation",
        "contained",
        "half_dim",
        "predicted",
    ]);
    r.row(vec![
        rep.degree.into(),
        rep.n.into(),
        rep.max_ratio.into(),
        rep.top_block_deviation.into(),
        rep.contained.into(),
        rep.half_dim.into(),
        rep.predicted.value.into(),
    ]);
    r.note(CONSTANTS_NOTE);
    Ok(r)
}
