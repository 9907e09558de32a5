//! Experiment configuration, validation and the batch runner behind the
//! `rcm` binary.
//!
//! A single TOML file describes one experiment: the environment law, the
//! domain, a seed and one subcommand-specific section. Outputs are CSV or
//! JSON and always embed a provenance block (config hash, seed, crate
//! version, and the full config text) so any artifact can be reproduced
//! from itself.

use crate::cluster::{self, ClusterPolicy};
use crate::corrector;
use crate::domain::{BoundaryMode, LatticeDomain};
use crate::env::{build_environment, build_trap_environment, Environment, EnvironmentLaw};
use crate::error::{RcmError, Result};
use crate::gradfield::{self, Gauge, MixtureSpec};
use crate::heatkernel;
use crate::homogenize::{self, MacroscopicProfile};
use crate::potential::{self, CenteredBox};
use crate::walk;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainCfg {
    pub sides: Vec<u32>,
    pub boundary: BoundaryMode,
}

impl DomainCfg {
    pub fn build(&self) -> Result<LatticeDomain> {
        LatticeDomain::new(self.sides.clone(), self.boundary)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional echo of the subcommand; must agree with the CLI when set.
    pub subcommand: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
    /// Solver tolerance override.
    pub tol: Option<f64>,
    pub domain: Option<DomainCfg>,
    pub law: Option<EnvironmentLaw>,

    pub walk: Option<WalkCfg>,
    pub resistance: Option<ResistanceCfg>,
    pub plate: Option<PlateCfg>,
    pub boxcond: Option<BoxcondCfg>,
    pub heatkernel: Option<HeatkernelCfg>,
    pub isoperimetry: Option<IsoperimetryCfg>,
    pub trap: Option<TrapCfg>,
    pub gradfield: Option<GradfieldCfg>,
    pub gff_scaling: Option<GffScalingCfg>,
    pub homogenize: Option<HomogenizeCfg>,
    pub resolvent: Option<ResolventCfg>,
    pub corrector: Option<CorrectorCfg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    /// The RCM1 environment byte format; `gen-env` only.
    Binary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkCfg {
    /// discrete | csrw | vsrw
    pub kind: String,
    pub x0: Vec<i64>,
    #[serde(default)]
    pub n_steps: usize,
    #[serde(default)]
    pub t_max: f64,
    #[serde(default = "one")]
    pub n_walks: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResistanceCfg {
    pub source: Vec<i64>,
    pub sink: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlateCfg {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxcondCfg {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectorCfg {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatkernelCfg {
    pub n_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoperimetryCfg {
    pub r_max: f64,
    #[serde(default)]
    pub allow_greedy: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrapCfg {
    pub strength: f64,
    pub location: Vec<i64>,
    pub t_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradfieldCfg {
    /// pinned vertex coordinates, or zero-mean gauge when absent
    pub pin: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GffScalingCfg {
    pub sides: Vec<u32>,
    pub box_len: f64,
    pub samples: usize,
    pub profile: MacroscopicProfile,
    pub kappas: Vec<f64>,
    pub kappa_weights: Vec<f64>,
    /// torus side for the diffusion-matrix computation
    pub q_side: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogenizeCfg {
    pub eps: Vec<f64>,
    pub t: f64,
    pub box_len: f64,
    pub samples: usize,
    pub profile: MacroscopicProfile,
    pub q_side: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventCfg {
    pub eps: Vec<f64>,
    pub box_len: f64,
    pub f: MacroscopicProfile,
    pub g: MacroscopicProfile,
    pub q_side: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub field: String,
    pub message: String,
}

/// Schema and semantic checks; an empty report means the config is runnable
/// for the given subcommand.
pub fn validate(sub: &str, cfg: &ExperimentConfig) -> Vec<Finding> {
    let mut findings = Vec::new();
    if let Some(decl) = &cfg.subcommand {
        if decl != sub {
            findings.push(Finding {
                field: "subcommand".into(),
                message: format!("config declares `{decl}` but `{sub}` was invoked"),
            });
        }
    }
    // sections the subcommand requires
    let mut required: Vec<(&str, bool)> = Vec::new();
    let needs_env = !matches!(sub, "gff-scaling" | "homogenize" | "resolvent");
    if needs_env {
        required.push(("domain", cfg.domain.is_some()));
        required.push(("law", cfg.law.is_some()));
    }
    match sub {
        "gen-env" | "plate" | "boxcond" | "embed" | "corrector" | "diffmat" | "gradfield" => {}
        "walk" => required.push(("walk", cfg.walk.is_some())),
        "resistance" => required.push(("resistance", cfg.resistance.is_some())),
        "heatkernel" => required.push(("heatkernel", cfg.heatkernel.is_some())),
        "isoperimetry" => required.push(("isoperimetry", cfg.isoperimetry.is_some())),
        "trap" => required.push(("trap", cfg.trap.is_some())),
        "gff-scaling" => required.push(("gff_scaling", cfg.gff_scaling.is_some())),
        "homogenize" => {
            required.push(("homogenize", cfg.homogenize.is_some()));
            required.push(("law", cfg.law.is_some()));
        }
        "resolvent" => {
            required.push(("resolvent", cfg.resolvent.is_some()));
            required.push(("law", cfg.law.is_some()));
        }
        other => findings.push(Finding {
            field: "subcommand".into(),
            message: format!("unknown subcommand `{other}`"),
        }),
    }
    for (field, present) in required {
        if !present {
            findings.push(Finding {
                field: field.to_string(),
                message: format!("section required by `{sub}` is missing"),
            });
        }
    }
    if let Some(domain) = &cfg.domain {
        if let Err(e) = domain.build() {
            findings.push(Finding {
                field: "domain".into(),
                message: e.to_string(),
            });
        }
    }
    if let Some(law) = &cfg.law {
        if let Err(e) = law.validate() {
            findings.push(Finding {
                field: "law".into(),
                message: e.to_string(),
            });
        }
    }
    if let Some(w) = &cfg.walk {
        if !matches!(w.kind.as_str(), "discrete" | "csrw" | "vsrw") {
            findings.push(Finding {
                field: "walk.kind".into(),
                message: "expected discrete | csrw | vsrw".into(),
            });
        }
    }
    if cfg.format == Some(OutputFormat::Binary) && sub != "gen-env" {
        findings.push(Finding {
            field: "format".into(),
            message: "binary output is only defined for `gen-env`".into(),
        });
    }
    if let Some(g) = &cfg.gff_scaling {
        if MixtureSpec::new(g.kappas.clone(), g.kappa_weights.clone()).is_err() {
            findings.push(Finding {
                field: "gff_scaling.kappas".into(),
                message: "invalid mixture (positive atoms, weights summing to 1)".into(),
            });
        }
        if g.profile.dimension() == 2 && g.profile.integral().abs() > 1e-9 {
            findings.push(Finding {
                field: "gff_scaling.profile".into(),
                message: "zero total integral required in d <= 2".into(),
            });
        }
    }
    if let Some(r) = &cfg.resolvent {
        let d = r.f.dimension();
        if d <= 2 && (r.f.integral().abs() > 1e-9 || r.g.integral().abs() > 1e-9) {
            findings.push(Finding {
                field: "resolvent.f/g".into(),
                message: "zero total integral required in d <= 2".into(),
            });
        }
    }
    findings
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub subcommand: String,
}

pub fn provenance(sub: &str, config_text: &str, seed: u64) -> Provenance {
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    Provenance {
        config_sha256: format!("{:x}", hasher.finalize()),
        seed,
        version: crate::VERSION.to_string(),
        subcommand: sub.to_string(),
    }
}

/// One produced artifact: bytes plus the format they are encoded in
/// (CSV and JSON artifacts are UTF-8 text).
#[derive(Debug, Clone)]
pub struct Artifact {
    pub content: Vec<u8>,
    pub format: OutputFormat,
}

impl Artifact {
    fn text(content: String, format: OutputFormat) -> Self {
        Artifact {
            content: content.into_bytes(),
            format,
        }
    }

    pub fn as_text(&self) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(&self.content)
    }
}

fn csv_header(prov: &Provenance, config_text: &str, columns: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "# provenance subcommand={} config_sha256={} seed={} version={}\n",
        prov.subcommand, prov.config_sha256, prov.seed, prov.version
    ));
    for line in config_text.lines() {
        s.push_str("# config: ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str(columns);
    s.push('\n');
    s
}

fn json_artifact(prov: &Provenance, config_text: &str, body: serde_json::Value) -> Artifact {
    let value = serde_json::json!({
        "provenance": {
            "subcommand": prov.subcommand,
            "config_sha256": prov.config_sha256,
            "seed": prov.seed,
            "version": prov.version,
            "config": config_text,
        },
        "result": body,
    });
    Artifact::text(
        serde_json::to_string_pretty(&value).expect("json artifact") + "\n",
        OutputFormat::Json,
    )
}

fn build_env(cfg: &ExperimentConfig, seed: u64) -> Result<Environment> {
    let domain = cfg
        .domain
        .as_ref()
        .ok_or_else(|| RcmError::invalid("domain", "missing"))?
        .build()?;
    let law = cfg
        .law
        .as_ref()
        .ok_or_else(|| RcmError::invalid("law", "missing"))?;
    build_environment(law, &domain, seed)
}

/// Execute `sub` with the parsed config and its original text (used for
/// provenance). Deterministic: identical inputs give byte-identical output.
pub fn run(sub: &str, cfg: &ExperimentConfig, config_text: &str) -> Result<Artifact> {
    let findings = validate(sub, cfg);
    if !findings.is_empty() {
        let msgs: Vec<String> = findings
            .iter()
            .map(|f| format!("{}: {}", f.field, f.message))
            .collect();
        return Err(RcmError::invalid("config", msgs.join("; ")));
    }
    let seed = cfg.seed;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let prov = provenance(sub, config_text, seed);
    let format = cfg.format.unwrap_or(OutputFormat::Json);

    match sub {
        "gen-env" => {
            let env = build_env(cfg, seed)?;
            match format {
                OutputFormat::Json => Ok(json_artifact(
                    &prov,
                    config_text,
                    serde_json::from_str(&env.to_json()).expect("env json"),
                )),
                OutputFormat::Csv => {
                    let mut body = csv_header(&prov, config_text, "edge,value");
                    for (e, w) in env.edge_values().iter().enumerate() {
                        body.push_str(&format!("{e},{w}\n"));
                    }
                    Ok(Artifact::text(body, format))
                }
                OutputFormat::Binary => Ok(Artifact {
                    content: env.to_bytes(),
                    format,
                }),
            }
        }
        "walk" => {
            let env = build_env(cfg, seed)?;
            let w = cfg.walk.as_ref().expect("validated");
            let x0 = env.domain().from_coords(&w.x0);
            let d = env.domain().dimension();
            let mut body = csv_header(&prov, config_text, {
                let coords: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
                &format!("walk_id,{},n", coords.join(","))
            });
            for i in 0..w.n_walks {
                let path = match w.kind.as_str() {
                    "discrete" => walk::simulate_discrete(&env, x0, w.n_steps, seed + i as u64)?,
                    "csrw" => walk::simulate_csrw(&env, x0, w.t_max, seed + i as u64)?,
                    _ => walk::simulate_vsrw(&env, x0, w.t_max, seed + i as u64)?,
                };
                let disp = path.displacement(&env, path.len_steps());
                let coords: Vec<String> = disp.iter().map(|c| c.to_string()).collect();
                body.push_str(&format!("{i},{},{}\n", coords.join(","), path.len_steps()));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "resistance" => {
            let env = build_env(cfg, seed)?;
            let r = cfg.resistance.as_ref().expect("validated");
            let source = env.domain().from_coords(&r.source);
            let sink: Vec<usize> = r.sink.iter().map(|c| env.domain().from_coords(c)).collect();
            let out = potential::effective_resistance(&env, source, &sink, tol)?;
            Ok(json_artifact(
                &prov,
                config_text,
                serde_json::json!({
                    "value": out.resistance,
                    "conductance": out.conductance,
                    "residual": out.residual,
                    "iterations": out.iterations,
                }),
            ))
        }
        "plate" => {
            let env = build_env(cfg, seed)?;
            let out = potential::plate_potential(&env, tol)?;
            let center = env.domain().center();
            Ok(json_artifact(
                &prov,
                config_text,
                serde_json::json!({
                    "value": out.field.values[center],
                    "residual": out.residual,
                    "iterations": out.iterations,
                }),
            ))
        }
        "boxcond" => {
            let env = build_env(cfg, seed)?;
            let out = potential::box_conductance(&env, tol)?;
            Ok(json_artifact(
                &prov,
                config_text,
                serde_json::json!({
                    "value": out.conductance,
                    "residual": out.residual,
                    "iterations": out.iterations,
                }),
            ))
        }
        "embed" => {
            let env = build_env(cfg, seed)?;
            let emb = corrector::harmonic_embedding(&env, tol)?;
            let d = env.domain().dimension();
            let cols: Vec<String> = (0..d).map(|i| format!("pos{i}")).collect();
            let mut body = csv_header(&prov, config_text, &format!("vertex,{}", cols.join(",")));
            for v in 0..env.num_vertices() {
                if !emb.valid[v] {
                    continue;
                }
                let pos: Vec<String> = (0..d)
                    .map(|i| format!("{}", emb.positions.components[i][v]))
                    .collect();
                body.push_str(&format!("{v},{}\n", pos.join(",")));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "corrector" => {
            let env = build_env(cfg, seed)?;
            let chi = corrector::periodized_corrector(&env, tol)?;
            let d = env.domain().dimension();
            let cols: Vec<String> = (0..d).map(|i| format!("chi{i}")).collect();
            let mut body = csv_header(&prov, config_text, &format!("vertex,{}", cols.join(",")));
            for v in 0..env.num_vertices() {
                let vals: Vec<String> = (0..d)
                    .map(|i| format!("{}", chi.components[i][v]))
                    .collect();
                body.push_str(&format!("{v},{}\n", vals.join(",")));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "diffmat" => {
            let env = build_env(cfg, seed)?;
            let chi = corrector::periodized_corrector(&env, tol)?;
            let dm = corrector::diffusion_matrix(&env, &chi)?;
            Ok(json_artifact(
                &prov,
                config_text,
                serde_json::json!({
                    "q": dm.q,
                    "pi_mean": dm.pi_mean,
                    "calibration": {
                        "vsrw_covariance_per_time": dm.vsrw_covariance(),
                        "discrete_covariance_per_step": dm.discrete_covariance(),
                        "note": "homogeneous unit environment gives q = identity",
                    },
                }),
            ))
        }
        "heatkernel" => {
            let env = build_env(cfg, seed)?;
            let hk = cfg.heatkernel.as_ref().expect("validated");
            let series =
                heatkernel::return_probability_series(&env, env.domain().center(), hk.n_max)?;
            let slope = series.tail_slope();
            let mut body = csv_header(&prov, config_text, "n,p2n,tail_slope");
            for &(t, p) in &series.entries {
                body.push_str(&format!("{},{p},{slope}\n", t / 2));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "isoperimetry" => {
            let env = build_env(cfg, seed)?;
            let iso = cfg.isoperimetry.as_ref().expect("validated");
            let profile = heatkernel::isoperimetric_profile(&env, iso.r_max, iso.allow_greedy)?;
            let mut body = csv_header(&prov, config_text, "r,phi,exact");
            for &(r, phi) in &profile.breakpoints {
                body.push_str(&format!("{r},{phi},{}\n", profile.exact));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "trap" => {
            let t = cfg.trap.as_ref().expect("validated");
            let domain = cfg
                .domain
                .as_ref()
                .ok_or_else(|| RcmError::invalid("domain", "missing"))?
                .build()?;
            let background = cfg
                .law
                .as_ref()
                .cloned()
                .unwrap_or(EnvironmentLaw::Constant { value: 1.0 });
            let (env, geo) =
                build_trap_environment(&domain, t.strength, &t.location, &background, seed)?;
            let times: Vec<usize> = (1..=t.t_max / 2).map(|k| 2 * k).collect();
            let decay = heatkernel::trap_decay_experiment(&env, &geo, &times)?;
            let mut body = csv_header(&prov, config_text, "t,measured,lower_bound");
            for i in 0..decay.times.len() {
                body.push_str(&format!(
                    "{},{},{}\n",
                    decay.times[i], decay.measured[i], decay.lower_bound[i]
                ));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "gradfield" => {
            let env = build_env(cfg, seed)?;
            let g = cfg.gradfield.as_ref();
            let gauge = match g.and_then(|g| g.pin.as_ref()) {
                Some(coords) => Gauge::Pinned(env.domain().from_coords(coords)),
                None => Gauge::ZeroMean,
            };
            let field = gradfield::sample_gaussian_field(&env, seed, gauge, tol)?;
            let mut body = csv_header(&prov, config_text, "vertex,height");
            for (v, h) in field.heights.iter().enumerate() {
                body.push_str(&format!("{v},{h}\n"));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "gff-scaling" => {
            let g = cfg.gff_scaling.as_ref().expect("validated");
            let spec = MixtureSpec::new(g.kappas.clone(), g.kappa_weights.clone())?;
            let law = EnvironmentLaw::Iid {
                distribution: crate::env::DistributionSpec::TwoPoint {
                    v1: spec.kappas[0],
                    p1: spec.weights[0],
                    v2: *spec.kappas.get(1).unwrap_or(&spec.kappas[0]),
                },
            };
            // diffusion matrix of the kappa law from a periodized corrector
            let d = g.profile.dimension();
            let q_dom = LatticeDomain::torus(vec![g.q_side; d])?;
            let q_env = build_environment(&law, &q_dom, seed)?;
            let chi = corrector::periodized_corrector(&q_env, tol)?;
            let dm = corrector::diffusion_matrix(&q_env, &chi)?;

            let mut body = csv_header(&prov, config_text, "side,eps,variance,target");
            for &side in &g.sides {
                let dom = LatticeDomain::torus(vec![side; d])?;
                let eps = g.box_len / side as f64;
                let mut acc = 0.0;
                for s in 0..g.samples {
                    let env = build_environment(&law, &dom, seed.wrapping_add(1 + s as u64))?;
                    let mut cells = homogenize::cell_averages(&g.profile, &dom, eps);
                    let mean = cells.iter().sum::<f64>() / cells.len() as f64;
                    for c in cells.iter_mut() {
                        *c -= mean;
                    }
                    let quad = gradfield::functional_variance(&env, &cells, tol)?;
                    acc += eps.powi(d as i32 + 2) * quad;
                }
                let var = acc / g.samples as f64;
                let grid: Vec<usize> = dom.sides().iter().map(|&s| s as usize).collect();
                let cells = homogenize::cell_averages(&g.profile, &dom, eps);
                let target =
                    gradfield::gff_variance_target(&cells, &grid, g.box_len, &dm.q)?;
                body.push_str(&format!("{side},{eps},{var},{target}\n"));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "homogenize" => {
            let h = cfg.homogenize.as_ref().expect("validated");
            let law = cfg
                .law
                .as_ref()
                .cloned()
                .ok_or_else(|| RcmError::invalid("law", "missing"))?;
            let d = h.profile.dimension();
            let q_dom = LatticeDomain::torus(vec![h.q_side; d])?;
            let q_env = build_environment(&law, &q_dom, seed)?;
            let chi = corrector::periodized_corrector(&q_env, tol)?;
            let dm = corrector::diffusion_matrix(&q_env, &chi)?;
            let table = homogenize::homogenization_error(
                &law,
                &dm,
                &h.profile,
                h.t,
                &h.eps,
                h.box_len,
                h.samples,
                seed.wrapping_add(1),
            )?;
            let mut body = csv_header(&prov, config_text, "eps,l2_error");
            for (eps, err) in table {
                body.push_str(&format!("{eps},{err}\n"));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        "resolvent" => {
            let r = cfg.resolvent.as_ref().expect("validated");
            let law = cfg
                .law
                .as_ref()
                .cloned()
                .ok_or_else(|| RcmError::invalid("law", "missing"))?;
            let d = r.f.dimension();
            let q_dom = LatticeDomain::torus(vec![r.q_side; d])?;
            let q_env = build_environment(&law, &q_dom, seed)?;
            let chi = corrector::periodized_corrector(&q_env, tol)?;
            let dm = corrector::diffusion_matrix(&q_env, &chi)?;
            let mut body = csv_header(&prov, config_text, "eps,pairing,target");
            for &eps in &r.eps {
                let side = (r.box_len / eps).round() as u32;
                let dom = LatticeDomain::torus(vec![side; d])?;
                let env = build_environment(&law, &dom, seed.wrapping_add(1))?;
                let out =
                    homogenize::resolvent_pairing(&env, &r.f, &r.g, &dm, eps, r.box_len, tol)?;
                body.push_str(&format!("{eps},{},{}\n", out.pairing, out.target));
            }
            Ok(Artifact::text(body, OutputFormat::Csv))
        }
        other => Err(RcmError::invalid("subcommand", format!("unknown `{other}`"))),
    }
}

/// Helper for tests and examples: lattice of the working cluster under a
/// policy, as a sorted vertex list.
pub fn select_cluster(env: &Environment, policy: ClusterPolicy) -> Result<Vec<usize>> {
    let labeling = cluster::label_clusters(env);
    cluster::working_cluster(&labeling, policy)
}

/// Escape conductance through growing boxes, a convenience wrapper used by
/// the percolation experiments: radius list around the center vertex.
pub fn escape_sweep(
    env: &Environment,
    radii: &[i64],
    tol: f64,
) -> Result<Vec<(i64, f64)>> {
    let center = env.domain().center();
    let coords = env.domain().to_coords(center);
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let lambda = CenteredBox {
            center: coords.clone(),
            radius: r,
        };
        let res = potential::escape_conductance(env, center, &lambda, tol)?;
        out.push((r, res.conductance));
    }
    Ok(out)
}
