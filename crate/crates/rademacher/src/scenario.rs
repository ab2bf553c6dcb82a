//! Scenario configuration and deterministic orchestration.
//!
//! A scenario is a JSON file naming a space, a coefficient family (inline or
//! CSV), a sampling mode, parameter grids, and a check list. Running it
//! executes distribution -> weak norms -> verification and emits CSV, JSON
//! and plain two-column plot data. Every numeric file carries the scenario
//! hash, and rerunning a scenario reproduces the files byte for byte
//! regardless of thread count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dist::{DistSummary, RademacherModel, SampleMode, EXACT_DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::space::{CoefficientFamily, SpaceSpec};
use crate::verify::{
    applicable_checks, run_checks, CheckId, Grids, Instance, VerificationReport,
};
use crate::weak::{kw12_with, kw_profile, AscentConfig, KProfile};

/// Where the coefficient matrix comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSource {
    Inline(Vec<Vec<f64>>),
    Csv(PathBuf),
}

/// Sampling mode as written in the scenario file.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum ModeSpec {
    #[default]
    Exact,
    Mc {
        samples: u64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// Either an explicit list or `{start, step, stop}` (inclusive endpoints).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range { start: f64, step: f64, stop: f64 },
    Explicit(Vec<f64>),
}

impl GridSpec {
    fn resolve(&self, name: &str, errors: &mut Vec<String>) -> Vec<f64> {
        let grid = match self {
            GridSpec::Explicit(v) => v.clone(),
            GridSpec::Range { start, step, stop } => {
                if !(step > &0.0) || stop < start {
                    errors.push(format!(
                        "grid `{name}`: bad range (start {start}, step {step}, stop {stop})"
                    ));
                    return Vec::new();
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        };
        if grid.is_empty() {
            errors.push(format!("grid `{name}` is empty"));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            errors.push(format!("grid `{name}` has a non-finite entry"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            errors.push(format!("grid `{name}` must be strictly increasing"));
        }
        grid
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSpec {
    #[serde(default)]
    pub t: Option<GridSpec>,
    #[serde(default)]
    pub u: Option<GridSpec>,
    #[serde(default)]
    pub p: Option<GridSpec>,
    #[serde(default)]
    pub q: Option<GridSpec>,
    #[serde(default)]
    pub s: Option<GridSpec>,
    #[serde(default)]
    pub lambda: Option<GridSpec>,
}

/// The scenario file as parsed. Unknown fields and unknown check ids are
/// rejected by serde; everything else is validated in [`load_scenario`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub space: SpaceSpec,
    pub coefficients: CoeffSource,
    #[serde(default)]
    pub mode: ModeSpec,
    /// Master seed for Monte Carlo and the ascent searches.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grids: GridsSpec,
    /// Explicit check list; when absent, every applicable check runs.
    #[serde(default)]
    pub checks: Option<Vec<CheckId>>,
    /// Raises the exact-enumeration cap (runtime grows as 2^N).
    #[serde(default)]
    pub exact_max_n: Option<usize>,
}

/// A validated scenario with resolved grids and loaded coefficients.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub family: CoefficientFamily,
    pub mode: SampleMode,
    pub seed: u64,
    pub grids: Grids,
    pub checks: Option<Vec<CheckId>>,
    hash: String,
}

impl Scenario {
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn ascent_config(&self) -> AscentConfig {
        AscentConfig {
            seed: self.seed,
            ..AscentConfig::default()
        }
    }

    /// Replace every seed (master and Monte Carlo) with `seed` and rehash.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let SampleMode::MonteCarlo { seed: s, .. } = &mut self.mode {
            *s = seed;
        }
        self.hash = scenario_hash(&self.family, &self.mode, self.seed, &self.grids, &self.checks);
    }
}

/// Load and validate a scenario file. Validation reports every violation at
/// once rather than stopping at the first.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    scenario_from_file(file, base)
}

/// Resolve a parsed scenario against a base directory for relative paths.
pub fn scenario_from_file(file: ScenarioFile, base: &Path) -> Result<Scenario> {
    let mut errors: Vec<String> = Vec::new();

    let family = match &file.coefficients {
        CoeffSource::Inline(rows) => CoefficientFamily::from_rows(file.space, rows),
        CoeffSource::Csv(rel) => {
            let full = if rel.is_absolute() {
                rel.clone()
            } else {
                base.join(rel)
            };
            if !full.exists() {
                return Err(Error::Io {
                    path: full.display().to_string(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "coefficient csv not found",
                    ),
                });
            }
            CoefficientFamily::from_csv_path(file.space, &full)
        }
    }?;

    let defaults = Grids::default();
    let resolve = |spec: &Option<GridSpec>, name: &str, dflt: &[f64], errors: &mut Vec<String>| {
        match spec {
            Some(g) => g.resolve(name, errors),
            None => dflt.to_vec(),
        }
    };
    let grids = Grids {
        t: resolve(&file.grids.t, "t", &defaults.t, &mut errors),
        u: resolve(&file.grids.u, "u", &defaults.u, &mut errors),
        p: resolve(&file.grids.p, "p", &defaults.p, &mut errors),
        q: resolve(&file.grids.q, "q", &defaults.q, &mut errors),
        s: resolve(&file.grids.s, "s", &defaults.s, &mut errors),
        lambda: resolve(&file.grids.lambda, "lambda", &defaults.lambda, &mut errors),
    };
    if grids.t.first().is_some_and(|&t| t < 0.0) {
        errors.push("grid `t` must be nonnegative".into());
    }
    if grids.u.iter().any(|&u| !(u > 0.0 && u <= 0.1)) {
        errors.push("grid `u` must lie in (0, 1/10]".into());
    }
    if grids.p.iter().any(|&p| p < 1.0) {
        errors.push("grid `p` entries must be >= 1".into());
    }
    if grids.q.iter().any(|&q| q <= 1.0) {
        errors.push("grid `q` entries must exceed 1".into());
    }
    if grids.s.iter().any(|&s| s < 1.0) {
        errors.push("grid `s` entries must be >= 1".into());
    }
    if grids.lambda.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        errors.push("grid `lambda` must lie strictly inside (0, 1)".into());
    }

    let mode = match file.mode {
        ModeSpec::Exact => SampleMode::Exact {
            cap: file.exact_max_n.unwrap_or(EXACT_DEFAULT_CAP),
        },
        ModeSpec::Mc { samples, seed } => {
            if samples == 0 {
                errors.push("mode MC needs samples >= 1".into());
            }
            SampleMode::MonteCarlo {
                samples,
                seed: seed.unwrap_or(file.seed),
            }
        }
    };

    if !errors.is_empty() {
        return Err(Error::Scenario(errors.join("; ")));
    }

    let hash = scenario_hash(&family, &mode, file.seed, &grids, &file.checks);
    Ok(Scenario {
        family,
        mode,
        seed: file.seed,
        grids,
        checks: file.checks,
        hash,
    })
}

fn scenario_hash(
    family: &CoefficientFamily,
    mode: &SampleMode,
    seed: u64,
    grids: &Grids,
    checks: &Option<Vec<CheckId>>,
) -> String {
    let mut h = Sha256::new();
    h.update(family.space().to_string().as_bytes());
    h.update((family.len() as u64).to_le_bytes());
    for x in family.coeffs().iter() {
        h.update(x.to_le_bytes());
    }
    match mode {
        SampleMode::Exact { cap } => {
            h.update(b"exact");
            h.update((*cap as u64).to_le_bytes());
        }
        SampleMode::MonteCarlo { samples, seed } => {
            h.update(b"mc");
            h.update(samples.to_le_bytes());
            h.update(seed.to_le_bytes());
        }
    }
    h.update(seed.to_le_bytes());
    for grid in [&grids.t, &grids.u, &grids.p, &grids.q, &grids.s, &grids.lambda] {
        h.update((grid.len() as u64).to_le_bytes());
        for x in grid {
            h.update(x.to_le_bytes());
        }
    }
    match checks {
        None => h.update(b"auto"),
        Some(list) => {
            for c in list {
                h.update(c.name().as_bytes());
            }
        }
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Identification block written into every output file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub scenario_hash: String,
    pub instance_hash: String,
}

/// Scalar statistics emitted alongside the distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistStats {
    pub provenance: Provenance,
    pub kind: String,
    pub atom_count: usize,
    pub mean: f64,
    pub median: f64,
    /// `(E S^p)^(1/p)` keyed by p.
    pub moments: BTreeMap<String, f64>,
    /// Weak-Lp norms keyed by p.
    pub weak_lp: BTreeMap<String, f64>,
    /// Orlicz norms keyed by q.
    pub orlicz: BTreeMap<String, f64>,
}

/// Everything a scenario run produces.
#[derive(Debug)]
pub struct ResultBundle {
    pub provenance: Provenance,
    pub dist: DistSummary,
    pub profile: KProfile,
    pub report: VerificationReport,
    pub stats: DistStats,
    pub files: Vec<PathBuf>,
}

fn crate_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn provenance_line(p: &Provenance) -> String {
    format!(
        "# scenario={} instance={} version={} seed={}",
        p.scenario_hash, p.instance_hash, p.version, p.seed
    )
}

/// The report JSON document: provenance plus the check records.
pub fn report_json(provenance: &Provenance, report: &VerificationReport) -> Result<String> {
    #[derive(Serialize)]
    struct ReportFile<'a> {
        provenance: &'a Provenance,
        report: &'a VerificationReport,
    }
    Ok(serde_json::to_string_pretty(&ReportFile { provenance, report })? + "\n")
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(content.as_bytes()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Run the distribution and verification stages only (what `verify` needs).
pub fn run_verification(s: &Scenario) -> Result<(Instance, VerificationReport, Provenance)> {
    let model = RademacherModel::new(s.family.clone(), s.mode).map_err(|e| e.staged("dist"))?;
    let dist = model.distribution().map_err(|e| e.staged("dist"))?;
    let inst = Instance::new(s.family.clone(), dist);

    let checks = resolve_checks(s, &inst)?;
    let report = run_checks(&inst, &s.grids, &checks).map_err(|e| e.staged("verify"))?;
    let provenance = Provenance {
        version: crate_version(),
        seed: s.seed,
        scenario_hash: s.hash.clone(),
        instance_hash: inst.hash().to_string(),
    };
    Ok((inst, report, provenance))
}

fn resolve_checks(s: &Scenario, inst: &Instance) -> Result<Vec<CheckId>> {
    let applicable = applicable_checks(inst);
    match &s.checks {
        None => Ok(applicable),
        Some(requested) => {
            for id in requested {
                if !applicable.contains(id) {
                    return Err(Error::Unsupported(format!(
                        "check {id} is not applicable to {} in {} mode",
                        inst.label(),
                        inst.dist.kind()
                    ))
                    .staged("verify"));
                }
            }
            Ok(requested.clone())
        }
    }
}

/// Execute a full scenario: distribution -> weak norms -> verification,
/// then emit all files under `out_dir`.
pub fn run_scenario(s: &Scenario, out_dir: &Path) -> Result<ResultBundle> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let (inst, report, provenance) = run_verification(s)?;
    let profile = kw_profile(&s.family, &s.grids.t, &s.ascent_config())
        .map_err(|e| e.staged("weak-norms"))?;

    let stats = compute_stats(&inst.dist, &s.grids, &provenance)?;
    let mut files = Vec::new();

    // Distribution CSV: value, probability, cumulative.
    {
        let mut out = String::new();
        out.push_str(&provenance_line(&provenance));
        out.push('\n');
        out.push_str("value,probability,cumulative\n");
        let total = inst.dist.total_count() as f64;
        let mut cum = 0u64;
        for a in inst.dist.atoms() {
            cum += a.count;
            out.push_str(&format!(
                "{},{},{}\n",
                a.value,
                a.count as f64 / total,
                cum as f64 / total
            ));
        }
        let path = out_dir.join("dist.csv");
        write_file(&path, &out)?;
        files.push(path);
    }

    // Distribution summary JSON.
    {
        let path = out_dir.join("dist_summary.json");
        write_file(&path, &(serde_json::to_string_pretty(&stats)? + "\n"))?;
        files.push(path);
    }

    // Kw profile CSV: t, kw, exactness, witness coordinates.
    {
        let mut out = String::new();
        out.push_str(&provenance_line(&provenance));
        out.push('\n');
        out.push_str("t,kw,exactness");
        for j in 1..=s.family.dim() {
            out.push_str(&format!(",w{j}"));
        }
        out.push('\n');
        for pt in profile.points() {
            out.push_str(&format!("{},{},{}", pt.t, pt.value, pt.exactness));
            match &pt.witness {
                Some(w) => {
                    for x in w.vector().iter() {
                        out.push_str(&format!(",{x}"));
                    }
                }
                None => {
                    for _ in 0..s.family.dim() {
                        out.push(',');
                    }
                }
            }
            out.push('\n');
        }
        let path = out_dir.join("kprofile.csv");
        write_file(&path, &out)?;
        files.push(path);
    }

    // Verification report JSON.
    {
        let path = out_dir.join("report.json");
        write_file(&path, &report_json(&provenance, &report)?)?;
        files.push(path);
    }

    let mut bundle = ResultBundle {
        provenance,
        dist: inst.dist.clone(),
        profile,
        report,
        stats,
        files,
    };

    // Plot data only when checks actually ran.
    if !bundle.report.records.is_empty() {
        let plot_files = emit_plotdata(s, &bundle, out_dir)?;
        bundle.files.extend(plot_files);
    }
    Ok(bundle)
}

fn compute_stats(dist: &DistSummary, grids: &Grids, prov: &Provenance) -> Result<DistStats> {
    let mut moments = BTreeMap::new();
    let mut weak_lp = BTreeMap::new();
    for &p in &grids.p {
        moments.insert(format!("{p}"), dist.moment(p)?);
        weak_lp.insert(format!("{p}"), dist.weak_lp_rv(p)?);
    }
    let mut orlicz = BTreeMap::new();
    for &q in &grids.q {
        orlicz.insert(format!("{q}"), dist.orlicz_norm(q)?);
    }
    Ok(DistStats {
        provenance: prov.clone(),
        kind: dist.kind().to_string(),
        atom_count: dist.atoms().len(),
        mean: dist.mean(),
        median: dist.median(),
        moments,
        weak_lp,
        orlicz,
    })
}

/// Emit the two-column plot files: the exact tail of
/// `S > 2 E S + 6 Kw(t)` with its `4 exp(-t^2/8)` envelope, and `S*(u)`
/// with its `E S + Kw(sqrt(log 1/u))` companion on the u-grid.
pub fn emit_plotdata(s: &Scenario, bundle: &ResultBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let plot_dir = out_dir.join("plot");
    std::fs::create_dir_all(&plot_dir).map_err(|source| Error::Io {
        path: plot_dir.display().to_string(),
        source,
    })?;
    let header = provenance_line(&bundle.provenance);
    let mean = bundle.dist.mean();
    let mut files = Vec::new();

    let mut tail_curve = format!("{header}\n");
    let mut tail_env = format!("{header}\n");
    for pt in bundle.profile.points() {
        let tail = bundle.dist.tail(2.0 * mean + 6.0 * pt.value);
        tail_curve.push_str(&format!("{} {}\n", pt.t, tail));
        tail_env.push_str(&format!("{} {}\n", pt.t, 4.0 * (-pt.t * pt.t / 8.0).exp()));
    }
    for (name, content) in [("tail_curve.dat", tail_curve), ("tail_envelope.dat", tail_env)] {
        let path = plot_dir.join(name);
        write_file(&path, &content)?;
        files.push(path);
    }

    let cfg = s.ascent_config();
    let mut re_curve = format!("{header}\n");
    let mut re_env = format!("{header}\n");
    for &u in &s.grids.u {
        let kw = kw12_with(&s.family, (1.0 / u).ln().sqrt(), &cfg)?;
        re_curve.push_str(&format!("{} {}\n", u, bundle.dist.rearrangement(u)?));
        re_env.push_str(&format!("{} {}\n", u, mean + kw.value));
    }
    for (name, content) in [
        ("rearrangement_curve.dat", re_curve),
        ("rearrangement_envelope.dat", re_env),
    ] {
        let path = plot_dir.join(name);
        write_file(&path, &content)?;
        files.push(path);
    }
    Ok(files)
}
