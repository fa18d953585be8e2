use branchmix::closed_form::{
    m2_bleed, m4_bleed, moment_constant_a, moment_product_form, moments_additive, BleedParams,
};
use branchmix::mc_oracle::{estimate, sample, sample_schedule, SampleSpec, Target};
use branchmix::mixture_stats::{
    convexity_ratio, density, exceedance, exceedance_constant_a, ln_exceedance, local_slopes,
    mixture_raw_moment, LogLogPoint,
};
use branchmix::specfn::gaussian_raw_moment;
use branchmix::{
    binomial_mixture, build_mixture, Base, Combination, Depth, Error, Mixture, ScheduleKind,
    ScheduleSpec, MAX_ENUMERATION_DEPTH,
};
use serde_json::json;

use crate::args::Grid;
use crate::table::{format_number, Cell, Table};

/// Number of standard errors a Monte Carlo estimate may sit from its reference.
pub const Z_CRITERION: f64 = 4.0;

/// Every mixture has a closed-form scale list when it is a binomial tree or
/// shallow enough to enumerate.
pub fn enumerable(spec: &ScheduleSpec) -> bool {
    spec.constant_rate().is_some() || spec.depth() <= MAX_ENUMERATION_DEPTH
}

pub fn mixture(base: &Base, spec: &ScheduleSpec) -> Result<Mixture, Error> {
    match spec.constant_rate() {
        Some(a) => binomial_mixture(base, a, spec.depth()),
        None => build_mixture(base, &spec.build()?),
    }
}

fn depths(spec: &ScheduleSpec, n_list: Option<&[usize]>) -> Result<Vec<ScheduleSpec>, Error> {
    match n_list {
        None => Ok(vec![spec.clone()]),
        Some(ns) => ns.iter().map(|&n| spec.with_depth(n)).collect(),
    }
}

fn echo(t: &mut Table, base: &Base, spec: &ScheduleSpec) {
    t.config.insert("mu".into(), json!(base.mu()));
    t.config.insert("sigma".into(), json!(base.sigma()));
    t.config.insert("schedule".into(), json!(spec.to_string()));
}

pub fn density_table(
    base: &Base,
    spec: &ScheduleSpec,
    grid: &Grid,
    n_list: Option<&[usize]>,
) -> Result<Table, Error> {
    let specs = depths(spec, n_list)?;
    let mixtures = specs
        .iter()
        .map(|s| mixture(base, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut columns = vec!["x".to_owned()];
    columns.extend(specs.iter().map(|s| format!("density_n{}", s.depth())));
    let mut t = Table::with_columns("density", columns);
    echo(&mut t, base, spec);
    t.config
        .insert("x".into(), json!([grid.min, grid.max, grid.step]));
    for x in grid.points() {
        let mut row = vec![Cell::Num(x)];
        row.extend(mixtures.iter().map(|m| Cell::Num(density(m, x))));
        t.push(row);
    }
    Ok(t)
}

pub fn exceed_table(
    base: &Base,
    spec: &ScheduleSpec,
    ks: &[f64],
    n_list: Option<&[usize]>,
) -> Result<Table, Error> {
    let gaussian = Mixture::gaussian(base);
    let mut t = Table::new(
        "exceed",
        &[
            "n",
            "k",
            "p_exceed",
            "ln_p_exceed",
            "gaussian_p",
            "ratio",
            "ln_ratio",
        ],
    );
    echo(&mut t, base, spec);
    t.config.insert("k".into(), json!(ks));
    for s in depths(spec, n_list)? {
        let m = mixture(base, &s)?;
        for &k in ks {
            let ln_p = ln_exceedance(&m, k);
            let ln_p0 = ln_exceedance(&gaussian, k);
            t.push(vec![
                s.depth().into(),
                k.into(),
                ln_p.exp().into(),
                ln_p.into(),
                exceedance(&gaussian, k).into(),
                (ln_p - ln_p0).exp().into(),
                (ln_p - ln_p0).into(),
            ]);
        }
    }
    Ok(t)
}

pub fn ratio_table(base: &Base, rates: &[f64], ns: &[usize], ks: &[f64]) -> Result<Table, Error> {
    let mut columns = vec!["a".to_owned(), "n".to_owned()];
    columns.extend(ks.iter().map(|k| format!("ratio_k{}", format_number(*k))));
    let mut t = Table::with_columns("ratio-table", columns);
    t.config.insert("mu".into(), json!(base.mu()));
    t.config.insert("sigma".into(), json!(base.sigma()));
    t.config.insert("a".into(), json!(rates));
    t.config.insert("n_list".into(), json!(ns));
    t.config.insert("k".into(), json!(ks));
    for &a in rates {
        for &n in ns {
            let mut row = vec![Cell::Num(a), n.into()];
            for &k in ks {
                row.push(convexity_ratio(base, a, n, k)?.into());
            }
            t.push(row);
        }
    }
    Ok(t)
}

/// The generating rate of an additive schedule.
fn additive_rate(spec: &ScheduleSpec) -> Option<f64> {
    if spec.mode != Combination::Additive {
        return None;
    }
    match &spec.kind {
        ScheduleKind::Geometric { a, .. } | ScheduleKind::Constant { a, .. } => Some(*a),
        ScheduleKind::Bleed { a1, .. } => Some(*a1),
        ScheduleKind::Explicit(r) => Some(r.first().copied().unwrap_or(0.0)),
    }
}

/// Raw moment from the regime's closed form, if one exists for this order.
pub fn closed_moment(base: &Base, spec: &ScheduleSpec, order: usize) -> Result<Option<f64>, Error> {
    let (mu, sigma) = (base.mu(), base.sigma());
    if let Some(a) = additive_rate(spec) {
        if !matches!(order, 1 | 2 | 4) {
            return Ok(None);
        }
        return moments_additive(order, mu, sigma, &a, Depth::Finite(spec.depth())).map(Some);
    }
    if let Some(a) = spec.constant_rate() {
        return moment_constant_a(order, mu, sigma, &a, spec.depth()).map(Some);
    }
    moment_product_form(order, mu, sigma, spec.build::<f64>()?.rates()).map(Some)
}

fn enumerated_moment(m: Option<&Mixture>, order: usize) -> Result<Option<f64>, Error> {
    m.map(|m| mixture_raw_moment(m, order)).transpose()
}

/// Limits of the second and fourth raw moments as depth → ∞.
fn limits(base: &Base, spec: &ScheduleSpec) -> Result<Option<(f64, f64)>, Error> {
    let (mu, sigma) = (*base.mu(), *base.sigma());
    if let Some(a) = additive_rate(spec) {
        if a >= 0.5 {
            return Ok(None);
        }
        let m2 = moments_additive(2, &mu, &sigma, &a, Depth::Infinite)?;
        let m4 = moments_additive(4, &mu, &sigma, &a, Depth::Infinite)?;
        return Ok(Some((m2, m4)));
    }
    match &spec.kind {
        ScheduleKind::Bleed { a1, lambda, .. } if *lambda < 1.0 => {
            let p = BleedParams::new(*a1, *lambda, Depth::Infinite, sigma)?;
            let (c2, c4) = (m2_bleed(&p)?, m4_bleed(&p)?);
            let mu2 = mu * mu;
            Ok(Some((mu2 + c2, mu2 * mu2 + 6.0 * mu2 * c2 + c4)))
        }
        ScheduleKind::Explicit(_) => Ok(None),
        _ => match spec.constant_rate() {
            Some(a) if a > 0.0 => Ok(Some((f64::INFINITY, f64::INFINITY))),
            Some(_) => Ok(Some((
                gaussian_raw_moment(2, &mu, &sigma)?,
                gaussian_raw_moment(4, &mu, &sigma)?,
            ))),
            None => Ok(None),
        },
    }
}

fn rel_diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    let (a, b) = (a?, b?);
    if a == b {
        Some(0.0)
    } else if b == 0.0 {
        Some((a - b).abs())
    } else {
        Some(((a - b) / b).abs())
    }
}

pub fn moments_table(base: &Base, spec: &ScheduleSpec, orders: &[usize]) -> Result<Table, Error> {
    let (mu, sigma) = (base.mu(), base.sigma());
    let m = enumerable(spec).then(|| mixture(base, spec)).transpose()?;
    let mut t = Table::new(
        "moments",
        &[
            "quantity",
            "closed_form",
            "enumeration",
            "rel_diff",
            "gaussian",
        ],
    );
    echo(&mut t, base, spec);
    t.config.insert("orders".into(), json!(orders));
    for &k in orders {
        let closed = closed_moment(base, spec, k)?;
        let brute = enumerated_moment(m.as_ref(), k)?;
        t.push(vec![
            format!("moment_{k}").into(),
            closed.into(),
            brute.into(),
            rel_diff(closed, brute).into(),
            gaussian_raw_moment(k, mu, sigma)?.into(),
        ]);
    }
    if let Some((l2, l4)) = limits(base, spec)? {
        for (name, v, k) in [("moment_2_limit", l2, 2), ("moment_4_limit", l4, 4)] {
            t.push(vec![
                name.into(),
                v.into(),
                Cell::Empty,
                Cell::Empty,
                gaussian_raw_moment(k, mu, sigma)?.into(),
            ]);
        }
    }
    // the mixture is symmetric about mu, so kurtosis is taken at mu = 0
    let centered = Base::new(0.0, *sigma)?;
    let c2 = closed_moment(&centered, spec, 2)?;
    let c4 = closed_moment(&centered, spec, 4)?;
    let closed_kurt = c2.zip(c4).map(|(m2, m4)| m4 / (m2 * m2));
    let brute_kurt = match &m {
        Some(m) => {
            let m = m.recentered(0.0);
            Some(mixture_raw_moment(&m, 4)? / mixture_raw_moment(&m, 2)?.powi(2))
        }
        None => None,
    };
    t.push(vec![
        "kurtosis".into(),
        closed_kurt.into(),
        brute_kurt.into(),
        rel_diff(closed_kurt, brute_kurt).into(),
        3.0.into(),
    ]);
    Ok(t)
}

pub fn loglog_table(
    base: &Base,
    spec: &ScheduleSpec,
    grid: &Grid,
    n_list: Option<&[usize]>,
    half_width: usize,
) -> Result<Table, Error> {
    if grid.min <= 0.0 {
        return Err(Error::Range(format!(
            "log-log grid needs x > 0, got min {}",
            grid.min
        )));
    }
    let mut t = Table::new(
        "loglog",
        &["n", "x", "ln_x", "p_exceed", "ln_p", "local_slope"],
    );
    echo(&mut t, base, spec);
    t.config
        .insert("x".into(), json!([grid.min, grid.max, grid.step]));
    t.config.insert("half_width".into(), json!(half_width));
    for s in depths(spec, n_list)? {
        let m = mixture(base, &s)?;
        let series: Vec<LogLogPoint<f64>> = grid
            .points()
            .into_iter()
            .map(|x| {
                let ln_p = ln_exceedance(&m, x);
                LogLogPoint {
                    x,
                    ln_x: x.ln(),
                    p_exceed: ln_p.exp(),
                    ln_p,
                }
            })
            .collect();
        let slopes = local_slopes(&series, half_width)?;
        for (p, slope) in series.iter().zip(slopes) {
            t.push(vec![
                s.depth().into(),
                p.x.into(),
                p.ln_x.into(),
                p.p_exceed.into(),
                p.ln_p.into(),
                slope.into(),
            ]);
        }
    }
    Ok(t)
}

pub struct Validation {
    pub table: Table,
    pub failures: usize,
}

fn exact_exceedance(
    base: &Base,
    spec: &ScheduleSpec,
    m: Option<&Mixture>,
    k: f64,
) -> Result<Option<f64>, Error> {
    if let Some(a) = spec.constant_rate() {
        return exceedance_constant_a(base, a, spec.depth(), k).map(Some);
    }
    Ok(m.map(|m| exceedance(m, k)))
}

pub fn validate(
    base: &Base,
    spec: &ScheduleSpec,
    n_samples: u64,
    seed: u64,
    orders: &[usize],
    ks: &[f64],
    self_test: bool,
) -> Result<Validation, Error> {
    let mut targets: Vec<Target> = orders.iter().map(|&k| Target::Moment(k)).collect();
    if self_test && !orders.contains(&2) {
        targets.push(Target::Moment(2));
    }
    targets.extend(ks.iter().map(|&k| Target::Exceedance(k)));
    let sample_spec = SampleSpec::new(n_samples, seed, targets.clone());

    let m = enumerable(spec).then(|| mixture(base, spec)).transpose()?;
    let summary = if spec.depth() <= MAX_ENUMERATION_DEPTH {
        sample(&build_mixture(base, &spec.build()?)?, &sample_spec)?
    } else if let Some(m) = &m {
        sample(m, &sample_spec)?
    } else {
        sample_schedule(base, &spec.build()?, &sample_spec)?
    };
    let report = estimate(&summary)?;

    let mut t = Table::new(
        "validate",
        &[
            "target",
            "reference",
            "estimate",
            "std_error",
            "z",
            "status",
        ],
    );
    echo(&mut t, base, spec);
    t.config.insert("seed".into(), json!(seed));
    t.config.insert("n_samples".into(), json!(n_samples));
    t.config.insert("orders".into(), json!(orders));
    t.config.insert("k".into(), json!(ks));
    t.config.insert("self_test".into(), json!(self_test));

    let mut failures = 0;
    let mut row = |t: &mut Table,
                   label: String,
                   reference: Option<f64>,
                   e: &branchmix::mc_oracle::Estimate| {
        let z = reference.map(|r| {
            let d = e.estimate - r;
            if e.std_error > 0.0 {
                d / e.std_error
            } else if d == 0.0 {
                0.0
            } else {
                d.signum() * f64::INFINITY
            }
        });
        let status = match reference {
            None => "no_reference",
            Some(_) if !e.reliable => "unreliable",
            Some(r) if e.covers(r, Z_CRITERION) => "pass",
            Some(_) => {
                failures += 1;
                "fail"
            }
        };
        t.push(vec![
            label.into(),
            reference.into(),
            e.estimate.into(),
            e.std_error.into(),
            z.into(),
            status.into(),
        ]);
    };

    for e in &report.estimates {
        let reference = match e.target {
            Target::Moment(k) => match closed_moment(base, spec, k)? {
                Some(v) => Some(v),
                None => enumerated_moment(m.as_ref(), k)?,
            },
            Target::Exceedance(k) => exact_exceedance(base, spec, m.as_ref(), k)?,
        };
        let requested = match e.target {
            Target::Moment(k) => orders.contains(&k),
            Target::Exceedance(_) => true,
        };
        if requested {
            row(&mut t, e.target.label(), reference, e);
        }
        if self_test && e.target == Target::Moment(2) {
            // negative control: a reference half again too large
            row(
                &mut t,
                "moment_2_shifted".into(),
                reference.map(|r| 1.5 * r),
                e,
            );
        }
    }
    Ok(Validation { table: t, failures })
}
