//! Task execution for a validated scenario.

use std::collections::BTreeMap;
use std::time::Instant;

use msk_core::crofoot::{self, CrofootPair};
use msk_core::inner::{self, InnerFn};
use msk_core::model_space::ModelSpaceBasis;
use msk_core::random;
use msk_core::selftest::{self, Instance, Level, Tolerances};
use msk_core::zerosym::{self, Finding};
use msk_core::{tto, CMat, CircleFn, Result};

use crate::report::{digest, verdict_of, InstanceId, ReportRecord, Verdict};
use crate::scenario::{Scenario, SymbolSource, Task};

/// Everything the tasks share, drawn once per scenario.
struct Context {
    inst: Instance,
    b1: ModelSpaceBasis,
    b2: ModelSpaceBasis,
}

fn prepare(s: &Scenario) -> Result<Context> {
    let raw = s.raw();
    let mut rng = random::seeded_rng(raw.seed);
    let coeffs: BTreeMap<i64, CMat> = match &raw.symbol {
        SymbolSource::Coeffs(list) => list.iter().cloned().collect(),
        SymbolSource::Random(r) => selftest::random_laurent(&mut rng, raw.d, r.degree, r.scale),
    };
    let w1 = raw.w1.clone().unwrap_or_else(|| random::strict_contraction(&mut rng, raw.d, selftest::CONTRACTION_SCALE));
    let w2 = raw.w2.clone().unwrap_or_else(|| random::strict_contraction(&mut rng, raw.d, selftest::CONTRACTION_SCALE));
    let theta1 = raw.theta1.build(raw.grid)?;
    let theta2 = raw.theta2.build(raw.grid)?;
    let phi = CircleFn::from_fourier(&coeffs, raw.grid)?;
    let b1 = ModelSpaceBasis::new(&theta1)?;
    let b2 = ModelSpaceBasis::new(&theta2)?;
    let inst = Instance {
        seed: raw.seed,
        d: raw.d,
        spec1: raw.theta1.clone(),
        spec2: raw.theta2.clone(),
        theta1,
        theta2,
        w1,
        w2,
        phi_coeffs: coeffs,
        phi,
    };
    Ok(Context { inst, b1, b2 })
}

type Outcome = (BTreeMap<String, f64>, Verdict, Vec<Finding>);

fn metrics<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn basis_task(ctx: &Context, tol: &Tolerances) -> Result<Outcome> {
    let (m1, m2) = (ctx.b1.membership_defect()?, ctx.b2.membership_defect()?);
    let (g1, g2) = (ctx.b1.gram_defect(), ctx.b2.gram_defect());
    let m = metrics([
        ("dim1", ctx.b1.dim() as f64),
        ("dim2", ctx.b2.dim() as f64),
        ("gram_defect1", g1),
        ("gram_defect2", g2),
        ("membership_defect1", m1),
        ("membership_defect2", m2),
    ]);
    let checks = [(g1.max(g2), tol.get("gram")), (m1.max(m2), tol.get("membership"))];
    Ok((m, verdict_of(&checks, &[]), vec![]))
}

fn tto_task(ctx: &Context, tol: &Tolerances) -> Result<Outcome> {
    let a = tto::build(&ctx.b1, &ctx.b2, &ctx.inst.phi)?;
    let via = tto::build_via_projection(&ctx.b1, &ctx.b2, &ctx.inst.phi)?;
    let route = (&a.mat - &via.mat).max_abs();
    let adjoint = tto::adjoint_pair_check(&ctx.b1, &ctx.b2, &ctx.inst.phi)?;
    let (rows, cols) = a.dims();
    let m = metrics([
        ("rows", rows as f64),
        ("cols", cols as f64),
        ("op_norm", a.mat.operator_norm()),
        ("frobenius_norm", a.mat.frobenius_norm()),
        ("adjoint_defect", adjoint),
        ("projection_route_defect", route),
    ]);
    let checks = [(adjoint, tol.get("adjoint")), (route, tol.get("projection_route"))];
    Ok((m, verdict_of(&checks, &[]), vec![]))
}

fn crofoot_task(ctx: &Context, tol: &Tolerances, seed: u64) -> Result<Outcome> {
    let mut rng = random::seeded_rng(seed ^ Task::Crofoot.stream());
    let (res, p1, _p2): (_, CrofootPair, CrofootPair) = selftest::crofoot_residuals(&ctx.inst, &mut rng)?;
    let mut kernel = 0.0f64;
    for _ in 0..10 {
        let lambda = random::disk_point(&mut rng, 0.9);
        let y = random::unit_vector(&mut rng, ctx.inst.d);
        kernel = kernel.max(crofoot::kernel_action_defect(&p1, lambda, &y)?);
    }
    let purity = purity_transfer(&ctx.inst.theta1)?;
    let m = metrics([
        ("unitarity", res.unitarity),
        ("push_defect", res.push),
        ("pull_defect", res.pull),
        ("push_as_published_defect", res.push_as_published),
        ("inversion", res.inversion),
        ("identity", res.identity),
        ("kernel_action", kernel),
        ("purity_transfer", purity),
    ]);
    let mut findings = Vec::new();
    let t = tol.get("intertwining");
    if res.push_as_published > t {
        findings.push(Finding {
            check: "published_forward_symbol_intertwines".into(),
            instance_seed: seed,
            lhs: res.push_as_published,
            rhs: 0.0,
            tolerance: t,
            verdict: "violated".into(),
        });
    }
    let checks = [
        (res.unitarity, tol.get("unitarity")),
        (res.push.max(res.pull), t),
        (res.inversion, tol.get("inversion")),
        (res.identity, tol.get("identity")),
        (kernel, tol.get("kernel_action")),
        (purity, tol.get("purity")),
    ];
    Ok((m, verdict_of(&checks, &findings), findings))
}

fn purity_transfer(theta: &InnerFn) -> Result<f64> {
    let w0 = theta.at_zero().clone();
    if w0.operator_norm() >= 1.0 - msk_core::matops::EPS_STRICT {
        return Ok(f64::NAN);
    }
    Ok(inner::crofoot_inner(theta, &w0)?.at_zero().operator_norm())
}

fn zero_task(ctx: &Context, tol: &Tolerances, seed: u64) -> Result<Outcome> {
    let mut rng = random::seeded_rng(seed ^ Task::Zero.stream());
    let (t1, t2) = (&ctx.inst.theta1, &ctx.inst.theta2);
    let generic = zerosym::zero_equivalence_check(&ctx.inst.phi, &ctx.b1, &ctx.b2)?;
    let grid = ctx.inst.phi.grid();
    let analytic = |rng: &mut _| -> Result<CircleFn> {
        let c: BTreeMap<i64, CMat> = (0..=3).map(|k| (k, random::gaussian(rng, ctx.inst.d, ctx.inst.d))).collect();
        CircleFn::from_fourier(&c, grid)
    };
    let (g1, g2) = (analytic(&mut rng)?, analytic(&mut rng)?);
    let member_phi = t1.func().mul(&g1)?.adjoint_fn().add(&t2.func().mul(&g2)?)?;
    let member = zerosym::zero_equivalence_check(&member_phi, &ctx.b1, &ctx.b2)?;
    let sufficiency = member.op_norm / member_phi.norm().max(f64::MIN_POSITIVE);
    let m = metrics([
        ("op_norm", generic.op_norm),
        ("residual", generic.residual),
        ("tol_op", generic.tol_op),
        ("tol_sym", generic.tol_sym),
        ("consistent", f64::from(u8::from(generic.consistent))),
        ("member_op_norm", member.op_norm),
        ("member_residual", member.residual),
        ("member_consistent", f64::from(u8::from(member.consistent))),
        ("member_relative_op_norm", sufficiency),
    ]);
    let findings: Vec<Finding> = [&generic, &member]
        .iter()
        .filter(|r| !r.consistent)
        .map(|r| r.to_finding(seed))
        .collect();
    let checks = [(sufficiency, tol.get("sufficiency"))];
    Ok((m, verdict_of(&checks, &findings), findings))
}

/// Dimension record shared by `run` and the `dim` subcommand.
pub fn dim_outcome(b1: &ModelSpaceBasis, b2: &ModelSpaceBasis, seed: u64) -> Result<Outcome> {
    let r = zerosym::tto_space_dim_with(b1, b2)?;
    let mut m = metrics([
        ("m", r.m as f64),
        ("n", r.n as f64),
        ("d", r.d as f64),
        ("computed", r.computed as f64),
        ("computed_wider", r.computed_wider as f64),
        ("paper_formula", r.paper_formula as f64),
        ("structural", r.structural as f64),
    ]);
    let mut checks = vec![(r.computed_wider as f64 - r.computed as f64, 0.0)];
    if let (Some(n1), Some(n2)) = (b1.theta().monomial_degree(), b2.theta().monomial_degree()) {
        let blocks = ((n1 + n2 - 1) * r.d * r.d) as f64;
        m.insert("block_count".into(), blocks);
        checks.push(((r.computed as f64 - blocks).abs(), 0.0));
    }
    let findings = if r.formula_agrees() { vec![] } else { vec![r.to_finding(seed)] };
    Ok((m, verdict_of(&checks, &findings), findings))
}

fn selftest_task(tol: &Tolerances, seed: u64) -> Result<Outcome> {
    let report = selftest::run(Level::Quick, seed, tol)?;
    let mut m = BTreeMap::new();
    let mut checks = Vec::new();
    for r in &report.results {
        m.insert(r.name.clone(), r.worst);
        checks.push((if r.passed { 0.0 } else { 1.0 }, 0.0));
    }
    Ok((m, verdict_of(&checks, &report.findings), report.findings))
}

/// Runs every task of a scenario in order, one record per task.
pub fn run_scenario(s: &Scenario) -> Vec<ReportRecord> {
    let raw = s.raw();
    let id = InstanceId { seed: raw.seed, digest: digest(s) };
    let tol = s.tolerances();
    let ctx = prepare(s);
    raw.tasks
        .iter()
        .map(|&task| {
            let start = Instant::now();
            let outcome = match &ctx {
                Err(e) => Err(e.clone()),
                Ok(ctx) => match task {
                    Task::Basis => basis_task(ctx, &tol),
                    Task::Tto => tto_task(ctx, &tol),
                    Task::Crofoot => crofoot_task(ctx, &tol, raw.seed),
                    Task::Zero => zero_task(ctx, &tol, raw.seed),
                    Task::Dim => dim_outcome(&ctx.b1, &ctx.b2, raw.seed),
                    Task::Selftest => selftest_task(&tol, raw.seed),
                },
            };
            let mut rec = match outcome {
                Ok((m, verdict, findings)) => ReportRecord::new(task.name(), id.clone(), m, verdict, findings),
                Err(e) => ReportRecord::failed(task.name(), id.clone(), e.to_string()),
            };
            rec.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            rec
        })
        .collect()
}
