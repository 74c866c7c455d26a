//! Named operations shared by `run`, `verify` and the direct subcommands.

use katolab::constructions::{build_splitting_map, gauging_function, heat_cutoff, local_coordinates};
use katolab::convergence::{ball_gh_to_euclidean, spectral_convergence_study, tangent_probe, volume_continuity_check};
use katolab::entropy::{derive_cn, heat_trace_scan, monotonicity_scan, theta_limit_check, volume_density};
use katolab::generators::{generate, Generated};
use katolab::geometry::{angle_defect_ric_minus, read_graph, read_obj, read_off, DiscreteSpace, PotentialField};
use katolab::heat::{spectrum, HeatKernel, SpectralData, DENSE_LIMIT};
use katolab::inequalities::{
    bakry_ledoux_residual, gaussian_bound_fit, gradient_estimate_check, harmonic_gradient_bound_check, hessian_estimate_check,
    li_yau_residual,
};
use katolab::kato::{classify_bounds, kato_profile, profile_csv, KatoProfile};
use katolab::report::{ReportBuilder, Verdict, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

pub const OPERATIONS: [&str; 20] = [
    "spectrum",
    "classify_bounds",
    "li_yau_residual",
    "gradient_estimate_check",
    "bakry_ledoux_residual",
    "gaussian_bound_fit",
    "monotonicity_scan",
    "heat_trace_scan",
    "theta_limit_check",
    "volume_density",
    "heat_cutoff",
    "gauging_function",
    "build_splitting_map",
    "hessian_estimate_check",
    "harmonic_gradient_bound_check",
    "ball_gh_to_euclidean",
    "tangent_probe",
    "spectral_convergence_study",
    "volume_continuity_check",
    "gh_upper_bound",
];

pub type OpResult<T> = Result<T, String>;

/// Loads a generator spec (`name(...)`) or a `.off`, `.obj` or `.graph` file.
pub fn load_space(source: &str) -> OpResult<(DiscreteSpace, Option<Generated>)> {
    if source.contains('(') || !source.contains('.') {
        let g = generate(source).map_err(|e| e.to_string())?;
        return Ok((g.clone().into_space().map_err(|e| e.to_string())?, Some(g)));
    }
    let text = std::fs::read_to_string(source).map_err(|e| format!("{source}: {e}"))?;
    let space = if source.ends_with(".off") {
        read_off(&text).and_then(|m| katolab::geometry::build_mesh_space(&m))
    } else if source.ends_with(".obj") {
        read_obj(&text).and_then(|m| katolab::geometry::build_mesh_space(&m))
    } else if source.ends_with(".graph") {
        read_graph(&text).and_then(|g| katolab::geometry::build_graph_space(&g))
    } else {
        return Err(format!("{source}: unknown file type (expected .off, .obj or .graph)"));
    };
    Ok((space.map_err(|e| format!("{source}: {e}"))?, None))
}

/// String parameters with typed accessors; unread keys are an error at `finish`.
pub struct Params {
    map: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Params {
    pub fn new(map: BTreeMap<String, String>) -> Self {
        Params { map, used: RefCell::new(BTreeSet::new()) }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> OpResult<Option<f64>> {
        self.raw(key).map(|v| v.parse::<f64>().map_err(|_| format!("parameter `{key}` must be a number, got `{v}`"))).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> OpResult<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> OpResult<usize> {
        self.raw(key)
            .map(|v| v.parse::<usize>().map_err(|_| format!("parameter `{key}` must be an unsigned integer, got `{v}`")))
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    pub fn str(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    /// Comma- or whitespace-separated numbers.
    pub fn list(&self, key: &str) -> OpResult<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().map_err(|_| format!("parameter `{key}`: `{s}` is not a number")))
                    .collect()
            })
            .transpose()
    }

    pub fn finish(&self) -> OpResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.map.keys().filter(|k| !used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(format!("unknown parameters: {}", unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")))
        }
    }
}

pub struct Context {
    pub space: DiscreteSpace,
    pub modes: Option<usize>,
    pub seed: u64,
    pub potential: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
    spectral: OnceLock<SpectralData>,
}

impl Context {
    pub fn new(space: DiscreteSpace, modes: Option<usize>, seed: u64, potential: Option<String>, tolerances: BTreeMap<String, f64>) -> Self {
        Context { space, modes, seed, potential, tolerances, spectral: OnceLock::new() }
    }

    pub fn spectral(&self) -> OpResult<&SpectralData> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let n = self.space.vertex_count();
        let m = self.modes.unwrap_or(if n <= DENSE_LIMIT { n } else { 300 }).min(n);
        let s = spectrum(&self.space, m).map_err(|e| e.to_string())?;
        Ok(self.spectral.get_or_init(|| s))
    }

    pub fn kernel(&self) -> OpResult<HeatKernel<'_>> {
        HeatKernel::new(&self.space, self.spectral()?).map_err(|e| e.to_string())
    }

    fn tol(&self, op: &str, default: f64) -> f64 {
        self.tolerances.get(op).copied().unwrap_or(default)
    }

    /// `angle_defect` (default on meshes), `zero` (default on graphs), `constant:c`, or `file:path`.
    pub fn potential(&self) -> OpResult<PotentialField> {
        let n = self.space.vertex_count();
        let spec = self.potential.clone().unwrap_or_else(|| if self.space.is_mesh() { "angle_defect".into() } else { "zero".into() });
        let field = if spec == "angle_defect" {
            angle_defect_ric_minus(&self.space)
        } else if spec == "zero" {
            Ok(PotentialField::zero(n))
        } else if let Some(c) = spec.strip_prefix("constant:") {
            let c: f64 = c.parse().map_err(|_| format!("potential constant `{c}` is not a number"))?;
            PotentialField::constant(n, c)
        } else if let Some(path) = spec.strip_prefix("file:") {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            let vals: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse).collect();
            PotentialField::new(vals.map_err(|_| format!("{path}: expected one number per vertex"))?)
        } else {
            return Err(format!("unknown potential `{spec}` (angle_defect, zero, constant:c, file:path)"));
        };
        field.map_err(|e| e.to_string())
    }

    fn profile(&self, hk: &HeatKernel, grid: &[f64]) -> OpResult<KatoProfile> {
        kato_profile(hk, &self.potential()?, grid).map_err(|e| e.to_string())
    }

    fn random_field(&self, salt: u64, lo: f64, hi: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt);
        (0..self.space.vertex_count()).map(|_| rng.gen_range(lo..hi)).collect()
    }

    fn vertex(&self, p: &Params, key: &str) -> OpResult<usize> {
        let x = p.usize_or(key, self.space.origin.unwrap_or(0))?;
        self.space.check_vertex(x).map_err(|e| e.to_string())?;
        Ok(x)
    }
}

pub struct Outcome {
    pub verdict: Option<Verdict>,
    pub json: Value,
    pub csv: Option<String>,
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    (0..n).map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64)).collect()
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn report_outcome(report: VerificationReport, extra: Value, csv: Option<String>) -> Outcome {
    let verdict = Some(report.verdict);
    let mut json = json!({ "report": to_json(&report) });
    if let (Value::Object(m), Value::Object(e)) = (&mut json, extra) {
        m.extend(e);
    }
    Outcome { verdict, json, csv: csv.or_else(|| Some(report.margins_csv())) }
}

fn family(p: &Params) -> OpResult<Vec<DiscreteSpace>> {
    let spec = p.str("family").ok_or("parameter `family` is required (generator specs separated by `;`)")?;
    spec.split(';').map(str::trim).filter(|s| !s.is_empty()).map(|s| load_space(s).map(|(sp, _)| sp)).collect()
}

pub fn run_op(ctx: &Context, name: &str, p: &Params) -> OpResult<Outcome> {
    let e = |e: katolab::Error| e.to_string();
    let out = match name {
        "spectrum" => {
            let sp = ctx.spectral()?;
            let m = p.usize_or("m", sp.mode_count())?.min(sp.mode_count());
            let mut ex = sp.export();
            ex.eigenvalues.truncate(m);
            ex.residuals.truncate(m);
            ex.m = m;
            let csv = ex.eigenvalues.iter().enumerate().fold(String::from("k,lambda\n"), |mut s, (k, l)| {
                s.push_str(&format!("{k},{l:e}\n"));
                s
            });
            Outcome { verdict: None, json: to_json(&ex), csv: Some(csv) }
        }
        "classify_bounds" => {
            let hk = ctx.kernel()?;
            let t = p.f64_or("T", 1.0)?;
            let n = p.usize_or("n", ctx.space.dim())?;
            let c = classify_bounds(&hk, &ctx.potential()?, t, n).map_err(e)?;
            let csv = profile_csv(&c.envelope, n).map_err(e)?;
            Outcome { verdict: None, json: json!({ "classification": to_json(&c.export()), "details": to_json(&c) }), csv: Some(csv) }
        }
        "li_yau_residual" => {
            let hk = ctx.kernel()?;
            let t0 = hk.t_min();
            let n = ctx.space.vertex_count();
            let source = ctx.vertex(p, "source")?;
            let (u0, _) = hk.kernel_row_clamped(p.f64_or("datum_time", t0)?, source).map_err(e)?;
            let xc = p.usize_or("x_count", 20)?.clamp(1, n);
            let xs: Vec<usize> = (0..xc).map(|k| k * n / xc).collect();
            let ts = geomspace(p.f64_or("t_lo", t0)?, p.f64_or("t_hi", 50.0 * t0)?, p.usize_or("t_count", 20)?);
            let profile = ctx.profile(&hk, &ts)?;
            let r = li_yau_residual(&hk, Some(&profile), &u0, &xs, &ts, ctx.tol(name, 1e-3)).map_err(e)?;
            report_outcome(r, json!({}), None)
        }
        "gradient_estimate_check" => {
            let hk = ctx.kernel()?;
            let t = p.f64_or("t", 4.0 * hk.t_min())?;
            let input = p.str("input").unwrap_or_else(|| "random".into());
            let u = if let Some(k) = input.strip_prefix("mode:") {
                let k: usize = k.parse().map_err(|_| format!("bad mode index `{k}`"))?;
                if k >= hk.spectral().mode_count() {
                    return Err(format!("mode {k} not computed"));
                }
                hk.spectral().mode(k)
            } else if input == "random" {
                ctx.random_field(0x6172, -1.0, 1.0)
            } else {
                return Err(format!("input must be `random` or `mode:k`, got `{input}`"));
            };
            let profile = ctx.profile(&hk, &[t])?;
            let g = gradient_estimate_check(&hk, Some(&profile), &u, t, ctx.tol(name, 1e-6)).map_err(e)?;
            let extra = json!({ "t": g.t, "k_t": g.k_t, "lip_u": g.lip_u, "lip_ptu": g.lip_ptu, "lipschitz_holds": g.lipschitz_holds });
            report_outcome(g.report, extra, None)
        }
        "bakry_ledoux_residual" => {
            let hk = ctx.kernel()?;
            let t = p.f64_or("t", 4.0 * hk.t_min())?;
            let v = ctx.random_field(0x626c, -1.0, 1.0);
            let phi = ctx.random_field(0x7068, 0.0, 1.0);
            let profile = ctx.profile(&hk, &[t])?;
            let b = bakry_ledoux_residual(&hk, Some(&profile), &v, &phi, t, ctx.tol(name, 1e-6)).map_err(e)?;
            let extra = json!({ "t": b.t, "k_t": b.k_t, "lhs": b.lhs, "rhs_id3": b.rhs_id3, "rhs_weak": b.rhs_weak, "weak": to_json(&b.weak) });
            report_outcome(b.id3, extra, None)
        }
        "gaussian_bound_fit" => {
            let hk = ctx.kernel()?;
            let t0 = hk.t_min();
            let x = ctx.vertex(p, "x")?;
            let n = ctx.space.vertex_count();
            let pc = p.usize_or("pairs", 20)?.clamp(1, n);
            let pairs: Vec<(usize, usize)> = (0..pc).map(|k| (x, k * n / pc)).collect();
            let ts = match p.list("t")? {
                Some(t) => t,
                None => geomspace(t0, 20.0 * t0, 5),
            };
            let g = gaussian_bound_fit(&hk, &pairs, &ts).map_err(e)?;
            report_outcome(g.report, json!({ "beta": g.beta, "samples_used": g.samples_used, "excluded": g.excluded }), None)
        }
        "monotonicity_scan" => {
            let hk = ctx.kernel()?;
            let x = ctx.vertex(p, "x")?;
            let s = p.f64_or("s", 0.02)?;
            let t = p.f64_or("t", 0.04)?;
            let lambdas = p.list("lambdas")?;
            let hi = s.max(t);
            let grid = geomspace((hk.t_min() * 1e-2).min(hi * 1e-2), hi, 16);
            let profile = ctx.profile(&hk, &grid)?;
            let c_n = p.f64_or("c_n", derive_cn(ctx.space.dim()).1)?;
            let scan = monotonicity_scan(&hk, &profile, x, s, t, lambdas.as_deref(), c_n).map_err(e)?;
            let csv = scan.to_csv();
            Outcome { verdict: Some(scan.report.verdict), json: to_json(&scan), csv: Some(csv) }
        }
        "heat_trace_scan" => {
            let hk = ctx.kernel()?;
            let t0 = hk.t_min();
            let x = ctx.vertex(p, "x")?;
            let ts = match p.list("t")? {
                Some(t) => t,
                None => geomspace(t0, 20.0 * t0, 12),
            };
            let profile = ctx.profile(&hk, &ts)?;
            let scan = heat_trace_scan(&hk, &profile, x, &ts).map_err(e)?;
            Outcome { verdict: None, json: to_json(&scan), csv: None }
        }
        "theta_limit_check" => {
            let hk = ctx.kernel()?;
            let x = ctx.vertex(p, "x")?;
            let s = p.f64_or("s", 0.02)?;
            let ts = p.list("t")?.unwrap_or_else(|| vec![s, s / 2.0, s / 4.0]);
            let r = theta_limit_check(&hk, s, x, &ts, ctx.tol(name, 0.05)).map_err(e)?;
            Outcome { verdict: Some(r.report.verdict), json: to_json(&r), csv: None }
        }
        "volume_density" => {
            let x = ctx.vertex(p, "x")?;
            let radii = p.list("radii")?;
            let d = volume_density(&ctx.space, x, radii.as_deref()).map_err(e)?;
            let (lo, hi) = (p.f64("min")?, p.f64("max")?);
            let csv = Some(d.to_csv());
            if lo.is_none() && hi.is_none() {
                Outcome { verdict: None, json: to_json(&d), csv }
            } else {
                let mut b = ReportBuilder::new("volume_density", format!("x={x}"), ctx.tol(name, 0.0));
                if let Some(lo) = lo {
                    b.push("density-min", d.density - lo, false);
                }
                if let Some(hi) = hi {
                    b.push("density-max", hi - d.density, false);
                }
                let report = b.finish();
                Outcome { verdict: Some(report.verdict), json: json!({ "estimate": to_json(&d), "min": lo, "max": hi, "report": to_json(&report) }), csv }
            }
        }
        "heat_cutoff" => {
            let hk = ctx.kernel()?;
            let x = ctx.vertex(p, "x")?;
            let r = p.f64_or("r", 0.2)?;
            let s = p.f64_or("s", r)?;
            let c = heat_cutoff(&hk, x, r, s, p.f64_or("T", 1.0)?).map_err(e)?;
            let mut b = ReportBuilder::new("heat_cutoff", format!("x={x},r={r},s={s}"), ctx.tol(name, 1e-9));
            b.push("interior", -c.interior_defect, false);
            b.push("exterior", -c.exterior_defect, false);
            let range = c.chi.iter().fold(0.0f64, |m, &v| m.max(-v).max(v - 1.0));
            b.push("range", -range, false);
            for t in &c.taints {
                b.taint(t.clone());
            }
            let csv = c.to_csv();
            let rep = b.finish();
            Outcome { verdict: Some(rep.verdict), json: json!({ "report": to_json(&rep), "cutoff": to_json(&c) }), csv: Some(csv) }
        }
        "gauging_function" => {
            let hk = ctx.kernel()?;
            let t_star = p.f64_or("t_star", 0.1)?;
            let count = p.usize_or("times", 8)?.max(1);
            let grid: Vec<f64> = (1..=count).map(|j| t_star * j as f64 / count as f64).collect();
            let g = gauging_function(&hk, &ctx.potential()?, t_star, &grid).map_err(e)?;
            let mut b = ReportBuilder::new("gauging_function", format!("t*={t_star}"), ctx.tol(name, 1e-8));
            b.push("bounds", -g.bounds_violation(), false);
            b.push("iterations", g.iteration_budget as f64 - g.iterations as f64, false);
            let rep = b.finish();
            Outcome { verdict: Some(rep.verdict), json: json!({ "report": to_json(&rep), "gauging": to_json(&g) }), csv: None }
        }
        "build_splitting_map" | "hessian_estimate_check" | "harmonic_gradient_bound_check" => {
            let x = ctx.vertex(p, "x")?;
            let r = p.f64_or("r", 0.1)?;
            let seeds = local_coordinates(&ctx.space, x).map_err(e)?;
            let map = build_splitting_map(&ctx.space, x, r, &seeds).map_err(e)?;
            match name {
                "build_splitting_map" => {
                    let verdict = match p.f64("max_eps")? {
                        Some(m) => {
                            let q = map.metrics;
                            let mut b = ReportBuilder::new(name, format!("x={x},r={r}"), 0.0);
                            b.push("eps_lip", m - q.eps_lip, false);
                            b.push("eps_gram", m - q.eps_gram, false);
                            if q.eps_hess.is_finite() {
                                b.push("eps_hess", m - q.eps_hess, false);
                            }
                            Some(b.finish().verdict)
                        }
                        None => None,
                    };
                    Outcome { verdict, json: to_json(&map.export()), csv: None }
                }
                "hessian_estimate_check" => {
                    let h = hessian_estimate_check(&ctx.space, &map.fields[0], x, r, p.f64_or("T", 1.0)?, p.f64("constant")?).map_err(e)?;
                    let extra = json!({ "lhs": h.lhs, "rhs": h.rhs, "ratio": h.ratio, "ratio_harmonic": h.ratio_harmonic, "excluded": h.excluded });
                    report_outcome(h.report, extra, None)
                }
                _ => {
                    let h = harmonic_gradient_bound_check(&ctx.space, &map.fields[0], x, r, p.f64_or("T", 1.0)?, p.f64("c_n")?, ctx.tol(name, 1e-6))
                        .map_err(e)?;
                    report_outcome(h.report, json!({ "ratio_mean": h.ratio_mean, "ratio_sup": h.ratio_sup, "exponent": h.exponent }), None)
                }
            }
        }
        "ball_gh_to_euclidean" => {
            let x = ctx.vertex(p, "x")?;
            let r = p.f64_or("r", 0.2)?;
            let g = ball_gh_to_euclidean(&ctx.space, x, r, p.usize_or("k", ctx.space.dim())?, p.usize_or("m", 100)?).map_err(e)?;
            Outcome { verdict: None, json: to_json(&g), csv: None }
        }
        "tangent_probe" => {
            let x = ctx.vertex(p, "x")?;
            let eps = p.list("eps")?.unwrap_or_else(|| vec![0.2, 0.1]);
            let t = tangent_probe(&ctx.space, x, &eps, p.usize_or("samples", 60)?).map_err(e)?;
            let csv = t.to_csv();
            Outcome { verdict: None, json: to_json(&t), csv: Some(csv) }
        }
        "spectral_convergence_study" => {
            let fam = family(p)?;
            let refs: Vec<&DiscreteSpace> = fam.iter().collect();
            let targets = p.list("targets")?;
            let m = p.usize_or("m", targets.as_ref().map_or(6, Vec::len))?;
            let st = spectral_convergence_study(&refs, m, targets.as_deref(), ctx.tol(name, 0.01)).map_err(e)?;
            let csv = st.to_csv();
            Outcome { verdict: Some(st.report.verdict), json: to_json(&st), csv: Some(csv) }
        }
        "volume_continuity_check" => {
            let fam = family(p)?;
            let refs: Vec<&DiscreteSpace> = fam.iter().collect();
            let xs: Vec<usize> = match p.list("xs")? {
                Some(v) => v.iter().map(|&x| x as usize).collect(),
                None => vec![0; fam.len()],
            };
            let v = volume_continuity_check(&refs, &xs, p.f64_or("r", 0.3)?, p.f64("target")?, ctx.tol(name, 0.02)).map_err(e)?;
            Outcome { verdict: Some(v.report.verdict), json: to_json(&v), csv: None }
        }
        "gh_upper_bound" => {
            let other = p.str("other").ok_or("parameter `other` is required")?;
            let (y, _) = load_space(&other)?;
            let all = |s: &DiscreteSpace| (0..s.vertex_count()).collect::<Vec<_>>();
            let a = katolab::convergence::FiniteMetric::from_space(&ctx.space, &all(&ctx.space)).map_err(e)?;
            let b = katolab::convergence::FiniteMetric::from_space(&y, &all(&y)).map_err(e)?;
            let g = if a.len() <= katolab::convergence::EXHAUSTIVE_LIMIT && b.len() <= katolab::convergence::EXHAUSTIVE_LIMIT {
                katolab::convergence::gh_distance_small(&a, &b).map_err(e)?
            } else {
                katolab::convergence::gh_upper_bound(&a, &b, p.usize_or("budget", 16)?)
            };
            Outcome { verdict: None, json: to_json(&g), csv: None }
        }
        _ => return Err(format!("unknown operation `{name}`; available: {}", OPERATIONS.join(", "))),
    };
    p.finish()?;
    Ok(out)
}
