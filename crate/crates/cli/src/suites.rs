//! Verification suites. Each check becomes one [`Record`].

use std::time::Instant;

use reglab_core::dense::{eig_oracle, gamma, norm2, sigma_max, spectral_radius, DEFAULT_MAXIT, DEFAULT_RANK_TOL};
use reglab_core::dilation::{
    build_corrupted_extension, build_extension, compression_check, derivative_check, example_gadget, growth_rates,
    kernel_data, lambda_independence, ransford_probe, subharmonicity_check, upper_right_block_zero, verify_extension,
    verify_gadget,
};
use reglab_core::radius::{
    closed_form_left_distance, closed_form_left_inverse, power_law_check, window_spectral_radius, zemanek_gap,
    OptimizerOptions, WindowSchedule,
};
use reglab_core::resolvent::{
    apostol_projection_check, backward_right_resolvent, block_probes, complement_resolvent_map, mp_resolvent_map,
    neumann_resolvent_map, residual_generalized_inverse, residual_left_inverse, residual_resolvent_identity,
    scalar_resolvent_map, shift_left_resolvent, standard_probes, ApostolData,
};
use reglab_core::{Domain, Error, ExtensionModel, OperatorExpr, ResolventMap, TailBoundedVector, C64};

use crate::config::{format_complex, ExperimentConfig, Suite};
use crate::report::{Record, Report};

const SERIES_TOL: f64 = 1e-15;
const KERNEL_WINDOW: usize = 32;
const STRUCTURE_WINDOW: usize = 64;
const GROWTH_STEPS: usize = 64;
const STEP: f64 = 1e-4;
const NEUMANN_RADIUS: f64 = 0.8;

#[derive(Debug, Clone, Copy)]
enum Rule {
    Below,
    AtLeast,
    Exceeds,
    Zero,
}

impl Rule {
    fn passes(self, residual: f64, tol: f64) -> bool {
        match self {
            Rule::Below => residual < tol,
            Rule::AtLeast => residual >= tol,
            Rule::Exceeds => residual > tol,
            Rule::Zero => residual == 0.0,
        }
    }
}

struct Recorder {
    timing: bool,
    report: Report,
}

impl Recorder {
    fn check(
        &mut self,
        check: String,
        anchor: &str,
        tol: f64,
        rule: Rule,
        f: impl FnOnce() -> reglab_core::Result<(f64, f64)>,
    ) {
        let start = Instant::now();
        let out = f();
        let seconds = if self.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let (value, residual, pass) = match out {
            Ok((v, r)) => (v, r, rule.passes(r, tol)),
            Err(e) => {
                self.report.notes.push(format!("{check}: {e}"));
                (f64::NAN, f64::NAN, false)
            }
        };
        self.report.records.push(Record {
            check,
            anchor: anchor.to_string(),
            value,
            residual,
            tolerance: tol,
            pass,
            seconds,
        });
    }

    /// One record per named residual of a [`reglab_core::ResidualReport`].
    fn residuals(
        &mut self,
        prefix: &str,
        names: &[&str],
        coords: &str,
        anchor: &str,
        tol: f64,
        f: impl FnOnce() -> reglab_core::Result<reglab_core::ResidualReport>,
    ) {
        let start = Instant::now();
        let out = f();
        let seconds = if self.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        for name in names {
            let check = format!("{prefix}.{name}[{coords}]");
            let r = match &out {
                Ok(rep) => rep.get(name).ok_or_else(|| format!("no residual named {name}")),
                Err(e) => Err(e.to_string()),
            };
            let (v, pass) = match r {
                Ok(v) => (v, v < tol),
                Err(msg) => {
                    self.report.notes.push(format!("{check}: {msg}"));
                    (f64::NAN, false)
                }
            };
            self.report.records.push(Record {
                check,
                anchor: anchor.to_string(),
                value: v,
                residual: v,
                tolerance: tol,
                pass,
                seconds,
            });
        }
    }
}

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn lam(z: C64) -> String {
    format_complex(z)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Runs the configured suite.
pub fn run(config: &ExperimentConfig) -> Result<Report, crate::config::ConfigError> {
    config.validate()?;
    let mut rec = Recorder {
        timing: config.timing,
        report: Report::default(),
    };
    let suites: Vec<Suite> = match config.suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    for s in suites {
        match s {
            Suite::Spectra => spectra(config, &mut rec)?,
            Suite::Radius => radius(config, &mut rec)?,
            Suite::Resolvent => resolvent(config, &mut rec),
            Suite::Gadget => gadget(config, &mut rec),
            Suite::Extend => extend(config, &mut rec),
            Suite::Apostol => apostol(&mut rec),
            Suite::Ransford => ransford(config, &mut rec),
            Suite::All => unreachable!(),
        }
    }
    Ok(rec.report)
}

/// Smallest nonzero weight modulus of the configured family.
fn weight_floor(config: &ExperimentConfig) -> f64 {
    let w: &[f64] = match config.op.family {
        crate::config::Family::Shift => &[1.0],
        _ => &config.op.weights,
    };
    w.iter()
        .map(|x| x.abs())
        .filter(|x| *x > 0.0)
        .fold(f64::INFINITY, f64::min)
        * config.op.scale.abs()
}

fn spectra(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), crate::config::ConfigError> {
    let t = config.op.build()?;
    let n = config.n;
    let coords = format!("op={},N={n}", config.op.label());
    let window = t.column_window(n).map(|w| w.matrix);

    rec.check(
        format!("spectra.norm2[{coords}]"),
        "operator-norm",
        1e-8,
        Rule::Below,
        || {
            let w = window.clone()?;
            let v = norm2(&w, 1e-12, DEFAULT_MAXIT)?.value;
            Ok((v, rel(v, sigma_max(&w))))
        },
    );
    rec.check(
        format!("spectra.reduced-minimum-modulus[{coords}]"),
        "reduced-minimum-modulus",
        1e-10,
        Rule::Below,
        || {
            let v = gamma(&window.clone()?, DEFAULT_RANK_TOL)?.value;
            Ok((v, rel(v, weight_floor(config))))
        },
    );
    rec.check(
        format!("spectra.left-inverse-radius[{coords}]"),
        "spectral-radius-of-left-inverse",
        1e-3,
        Rule::Below,
        || {
            let s = closed_form_left_inverse(&t)
                .ok_or_else(|| Error::InvalidInput("no closed-form left inverse".into()))?;
            let d = closed_form_left_distance(&t, c(0.0))
                .ok_or_else(|| Error::InvalidInput("no closed-form distance".into()))?;
            let r = window_spectral_radius(&s, n)?.value;
            Ok((r, rel(r, 1.0 / d)))
        },
    );
    let m = 32;
    rec.check(
        format!("spectra.hermitian-radius[op={},N={m}]", config.op.label()),
        "spectral-radius-oracle",
        1e-8,
        Rule::Below,
        || {
            let h = t.plus(&t.adjoint()).truncate(m)?;
            let v = spectral_radius(&h, 1e-13, DEFAULT_MAXIT)?.value;
            let want = eig_oracle(&h)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok((v, rel(v, want)))
        },
    );
    Ok(())
}

fn radius(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), crate::config::ConfigError> {
    let t = config.op.build()?;
    let kmax = config.kmax;
    let opts = OptimizerOptions {
        budget: config.budget,
        seed: config.seed,
        ..OptimizerOptions::default()
    };
    let label = config.op.label();
    let z = zemanek_gap(&t, c(0.0), kmax, WindowSchedule::default(), &opts);
    let closed = closed_form_left_distance(&t, c(0.0));

    rec.check(
        format!("radius.regularity-radius[op={label},kmax={kmax}]"),
        "regularity-radius-limit",
        1e-3,
        Rule::Below,
        || {
            let z = z.clone()?;
            let gap = if !z.gamma_certified {
                f64::INFINITY
            } else {
                closed.map_or(0.0, |d| (z.gamma_limit - d).abs())
            };
            Ok((z.gamma_limit, gap))
        },
    );
    rec.check(
        format!(
            "radius.optimizer-sup[op={label},budget={},seed={}]",
            config.budget, config.seed
        ),
        "sup-over-left-inverses",
        1e-2,
        Rule::Below,
        || {
            let z = z.clone()?;
            Ok((z.optimizer_sup, closed.map_or(0.0, |d| (z.optimizer_sup - d).abs())))
        },
    );
    rec.check(
        format!("radius.sup-bound[op={label},kmax={kmax}]"),
        "sup-bound",
        2e-2,
        Rule::Below,
        || {
            let z = z.clone()?;
            let excess = z.optimizer_sup - z.gamma_limit;
            Ok((excess, excess.max(0.0)))
        },
    );
    let pk = kmax.min(12);
    rec.check(
        format!("radius.power-law[op={label},n=2,kmax={pk}]"),
        "power-law",
        5e-3,
        Rule::Below,
        || {
            let r = power_law_check(&t, 2, pk, WindowSchedule::default())?;
            Ok((r.s_tn, r.gap))
        },
    );
    Ok(())
}

fn complement_map(n: usize) -> ResolventMap {
    complement_resolvent_map(
        &OperatorExpr::shift(),
        vec![TailBoundedVector::basis(1)],
        n,
        Domain::disk(1.0),
    )
}

fn resolvent(config: &ExperimentConfig, rec: &mut Recorder) {
    let t = OperatorExpr::shift();
    let probes = standard_probes();
    let grid = &config.lambdas;
    let maps = [complement_map(config.n), shift_left_resolvent()];

    for map in &maps {
        for &z in grid {
            rec.residuals(
                "resolvent",
                &["left-inverse"],
                &format!("map={},lambda={}", map.name(), lam(z)),
                "left-resolvent",
                1e-10,
                || residual_left_inverse(map, &t, z, &probes),
            );
        }
        for pair in grid.windows(2) {
            rec.residuals(
                "resolvent",
                &["resolvent-identity"],
                &format!("map={},lambda={},mu={}", map.name(), lam(pair[0]), lam(pair[1])),
                "resolvent-identity",
                1e-10,
                || residual_resolvent_identity(map, pair[0], pair[1], &probes),
            );
        }
    }

    let mp = mp_resolvent_map(&t, config.n, Domain::disk(1.0));
    let (l1, l2) = (c(0.3), C64::new(0.0, 0.5));
    rec.check(
        format!(
            "resolvent.resolvent-identity-control[map=mp,lambda={},mu={},N={}]",
            lam(l1),
            lam(l2),
            config.n
        ),
        "resolvent-identity-control",
        1e-2,
        Rule::Exceeds,
        || {
            let r = residual_resolvent_identity(&mp, l1, l2, &probes)?.max_residual;
            Ok((r, r))
        },
    );

    let neumann = neumann_resolvent_map(&OperatorExpr::backward(), SERIES_TOL);
    let inner: Vec<C64> = grid.iter().copied().filter(|z| z.norm() <= NEUMANN_RADIUS).collect();
    for &z in &inner {
        rec.residuals(
            "resolvent",
            &["inner-inverse", "outer-inverse"],
            &format!("map=neumann,lambda={}", lam(z)),
            "generalized-resolvent",
            config.tol,
            || residual_generalized_inverse(&neumann, &t, z, &probes),
        );
    }
    for pair in inner.windows(2) {
        rec.residuals(
            "resolvent",
            &["resolvent-identity"],
            &format!("map=neumann,lambda={},mu={}", lam(pair[0]), lam(pair[1])),
            "resolvent-identity",
            config.tol,
            || residual_resolvent_identity(&neumann, pair[0], pair[1], &probes),
        );
    }

    let d = c(0.3);
    for map in &maps {
        rec.residuals(
            "resolvent",
            &["real-step", "imag-step"],
            &format!("map={},lambda={},step={STEP:e}", map.name(), lam(d)),
            "derivative-criterion",
            1e-3,
            || derivative_check(map, d, STEP, &probes),
        );
    }
    for step in [1e-4, 1e-5] {
        rec.check(
            format!(
                "resolvent.derivative-control[map=mp,lambda={},step={step:e},N={}]",
                lam(d),
                config.n
            ),
            "derivative-control",
            1e-2,
            Rule::Exceeds,
            || {
                let r = derivative_check(&mp, d, step, &probes)?;
                let v = r.breakdown.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
                Ok((v, v))
            },
        );
    }
    let scalar = scalar_resolvent_map(c(2.0));
    let z0 = c(0.0);
    rec.check(
        format!(
            "resolvent.derivative-scalar[map=scalar,lambda={},step={STEP:e}]",
            lam(z0)
        ),
        "derivative-criterion",
        std::f64::consts::LN_2,
        Rule::Below,
        || {
            let r = derivative_check(&scalar, z0, STEP, &probes)?.max_residual;
            let bound = (2.0 / (z0 - 2.0).powi(3)).norm() * STEP / 2.0;
            Ok((r, (r / bound).ln().abs()))
        },
    );
}

fn gadget(config: &ExperimentConfig, rec: &mut Recorder) {
    let probes: Vec<TailBoundedVector> = (1..=16).map(TailBoundedVector::basis).collect();
    for &z in &config.lambdas {
        rec.residuals(
            "gadget",
            &["cond1", "cond2", "cond3", "range-r", "kernel-k"],
            &format!("lambda={}", lam(z)),
            "gadget-conditions",
            config.tol,
            || verify_gadget(&example_gadget(z, SERIES_TOL)?, z, &probes),
        );
    }
}

fn shift_extension(l: &ResolventMap, w: usize, z: C64, coupled: bool) -> reglab_core::Result<ExtensionModel> {
    let t = OperatorExpr::shift();
    let g = example_gadget(z, SERIES_TOL)?;
    let kd = kernel_data(l, &t, z, w)?;
    if coupled {
        build_extension(&t, l, &g, &kd, z)
    } else {
        build_corrupted_extension(&t, l, &g, &kd, z)
    }
}

fn extend(config: &ExperimentConfig, rec: &mut Recorder) {
    let l = shift_left_resolvent();
    let name = l.name().to_string();
    let block = block_probes(2, 16);
    let probes = standard_probes();
    for z in [c(0.0), c(0.3), C64::new(0.0, 0.5)] {
        let ext = shift_extension(&l, KERNEL_WINDOW, z, true);
        let coords = format!("map={name},lambda={}", lam(z));
        rec.residuals(
            "extend",
            &["left-identity", "right-identity"],
            &coords,
            "extension-inverse",
            config.tol,
            || verify_extension(ext.as_ref().map_err(Clone::clone)?, &block),
        );
        rec.check(
            format!("extend.upper-right-zero[{coords},N={STRUCTURE_WINDOW}]"),
            "structural-zero",
            0.0,
            Rule::Zero,
            || {
                let zero = upper_right_block_zero(ext.as_ref().map_err(Clone::clone)?, STRUCTURE_WINDOW)?;
                let v = if zero { 0.0 } else { 1.0 };
                Ok((v, v))
            },
        );
        rec.residuals("extend", &["compression"], &coords, "compression", 1e-10, || {
            compression_check(ext.as_ref().map_err(Clone::clone)?, &probes)
        });
    }

    let zc = c(0.3);
    rec.check(
        format!("extend.corrupted-control[map={name},lambda={}]", lam(zc)),
        "coupling-necessity",
        0.1,
        Rule::AtLeast,
        || {
            let r = verify_extension(&shift_extension(&l, KERNEL_WINDOW, zc, false)?, &block)?.max_residual;
            Ok((r, r))
        },
    );

    let (l1, l2) = (c(0.3), C64::new(0.0, 0.5));
    let comp = complement_map(config.n);
    rec.check(
        format!(
            "extend.lambda-independence[map=complement,lambda={},mu={},N={STRUCTURE_WINDOW}]",
            lam(l1),
            lam(l2)
        ),
        "lambda-independence",
        1e-10,
        Rule::Below,
        || {
            let d = lambda_independence(
                |z| shift_extension(&comp, config.n + 1, z, true),
                l1,
                l2,
                STRUCTURE_WINDOW,
            )?;
            Ok((d, d))
        },
    );
    let mp = mp_resolvent_map(&OperatorExpr::shift(), config.n, Domain::disk(1.0));
    rec.check(
        format!(
            "extend.lambda-independence-control[map=mp,lambda={},mu={},N={STRUCTURE_WINDOW}]",
            lam(l1),
            lam(l2)
        ),
        "lambda-independence-control",
        0.05,
        Rule::Exceeds,
        || {
            let d = lambda_independence(
                |z| shift_extension(&mp, config.n + 1, z, true),
                l1,
                l2,
                STRUCTURE_WINDOW,
            )?;
            Ok((d, d))
        },
    );

    for z in [c(0.0), c(0.3), c(0.5)] {
        rec.check(
            format!("extend.growth-rate[map={name},lambda={},k={GROWTH_STEPS}]", lam(z)),
            "growth-rate",
            0.05,
            Rule::Below,
            || {
                let rates = growth_rates(&shift_extension(&l, KERNEL_WINDOW, z, true)?, GROWTH_STEPS)?;
                let g = rates[GROWTH_STEPS - 1];
                Ok((g, rel(g, 1.0 / (1.0 - z.norm()))))
            },
        );
    }
}

fn apostol_example(coupled: bool) -> ApostolData {
    let e1 = TailBoundedVector::basis(1);
    ApostolData {
        tr: OperatorExpr::backward(),
        t0: OperatorExpr::scalar(c(2.0)),
        tl: OperatorExpr::shift(),
        a: coupled.then(|| OperatorExpr::rank_one(e1.clone(), e1)),
        b: None,
        c: None,
        rmap: backward_right_resolvent(),
        r0map: scalar_resolvent_map(c(2.0)),
        lmap: shift_left_resolvent(),
    }
}

fn apostol(rec: &mut Recorder) {
    let probes = block_probes(3, 16);
    let (l1, l2) = (c(0.3), C64::new(0.0, 0.5));
    for coupled in [false, true] {
        let example = if coupled { "rank-one" } else { "uncoupled" };
        let d = apostol_example(coupled);
        let map = d.map();
        let t = d.operator();
        for z in [l1, l2] {
            rec.residuals(
                "apostol",
                &["inner-inverse", "outer-inverse"],
                &format!("example={example},lambda={}", lam(z)),
                "generalized-resolvent",
                1e-9,
                || residual_generalized_inverse(&map, &t, z, &probes),
            );
        }
        rec.residuals(
            "apostol",
            &[
                "range-projection",
                "kernel-projection",
                "range-idempotent",
                "kernel-idempotent",
            ],
            &format!("example={example},lambda={},mu={}", lam(l1), lam(l2)),
            "range-kernel-projections",
            1e-9,
            || apostol_projection_check(&d, l1, l2, &probes),
        );
    }
}

fn ransford(config: &ExperimentConfig, rec: &mut Recorder) {
    let n = config.ransford_n;
    let l = c(1.0);
    let radius = 2f64.sqrt();
    rec.check(
        format!("ransford.sigma-min-circle[lambda={},z={radius},N={n}]", lam(l)),
        "left-spectrum-circle",
        5e-2,
        Rule::Below,
        || {
            let r = ransford_probe(l, &[c(radius)], n)?;
            let v = r.min_near_circle(1e-12).unwrap_or(f64::NAN);
            Ok((v, v))
        },
    );
    let inner = 0.8 * radius;
    let grid = [c(0.0), c(inner), C64::new(0.0, inner), c(-inner), C64::new(0.0, -inner)];
    rec.check(
        format!("ransford.sigma-min-inside[lambda={},rmax={inner},N={n}]", lam(l)),
        "left-spectrum-interior",
        0.1,
        Rule::AtLeast,
        || {
            let r = ransford_probe(l, &grid, n)?;
            let v = r.min_inside(inner + 1e-12).unwrap_or(f64::NAN);
            Ok((v, v))
        },
    );
    let s = subharmonicity_check();
    rec.check(
        format!("ransford.not-subharmonic[points={}]", s.points),
        "maximum-at-origin",
        0.0,
        Rule::Exceeds,
        || Ok((s.circle_mean, s.phi_at_zero - s.circle_mean)),
    );
}
