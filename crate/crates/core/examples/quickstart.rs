use branchmix::closed_form::{m4_bleed, moment_constant_a, BleedParams};
use branchmix::mixture_stats::{density, exceedance_constant_a, mixture_raw_moment};
use branchmix::{build_mixture, Base, Depth, ErrorSchedule, ExactBase, Rational};

fn main() -> branchmix::Result<()> {
    // 2^10 branches, every level perturbing the scale by ±10%
    let base = Base::new(0.0, 1.0)?;
    let mixture = build_mixture(&base, &ErrorSchedule::constant(0.1, 10)?)?;
    println!("f(0) = {}", density(&mixture, 0.0));

    // tail probability at depth 25 through the binomial collapse
    let p = exceedance_constant_a(&base, 0.1, 25, 10.0)?;
    println!("P(X > 10) = {p:e}");

    // fourth moment once the error rate decays geometrically, N = inf
    let m4 = m4_bleed(&BleedParams::new(0.2, 0.9, Depth::Infinite, 1.0)?)?;
    println!("m4 limit = {m4}");

    // the same algebra in exact rationals
    let a = Rational::new(1.into(), 10.into());
    let exact = ExactBase::new(Rational::from_integer(0.into()), Rational::from_integer(1.into()))?;
    let m = build_mixture(&exact, &ErrorSchedule::constant(a.clone(), 6)?)?;
    assert_eq!(
        mixture_raw_moment(&m, 4)?,
        moment_constant_a(4, exact.mu(), exact.sigma(), &a, 6)?
    );
    Ok(())
}
