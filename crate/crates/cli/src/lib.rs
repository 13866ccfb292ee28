//! Command-line front end for the atomgame solvers.
//!
//! Every successful run prints one JSON [`RunReport`] on standard output.
//! Diagnostics go to standard error.

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use atomgame_core::basis::{self, BasisKind, BasisOutcome, RaNetwork, RelationalOutcome};
use atomgame_core::blur::{self, BlurSpec};
use atomgame_core::ef::{self, Graph};
use atomgame_core::game::{self, GameConfig, GameOutcome, Rounds, ScriptVerdict};
use atomgame_core::io::{self, Structure};
use atomgame_core::rainbow::{self, ConeScript, RainbowSignature, RainbowVariant, YellowFamily};
use atomgame_core::{validate_ca, validate_ra, CaAtomStructure, Error, GreedyScript, Player, RaAtomStructure};

pub const SCHEMA: u32 = 1;
pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetUsage {
    pub limit: Option<usize>,
    pub explored: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: Vec<String>,
    pub parameters: Value,
    pub outcome: Value,
    pub witness: Value,
    pub timing: Timing,
    pub budget: BudgetUsage,
}

#[derive(Parser, Debug)]
#[command(name = "atomgame", version, about = "Atomic games, rainbow algebras, blurs and bases")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an atom structure.
    Validate {
        #[arg(long)]
        algebra: String,
    },
    /// Build rainbow atom structures.
    #[command(subcommand)]
    Rainbow(RainbowCmd),
    /// Check blur conditions or build blown-up structures.
    #[command(subcommand)]
    Blur(BlurCmd),
    /// Search for a basis by saturation.
    #[command(subcommand)]
    Basis(BasisCmd),
    /// Solve atomic games or verify strategy scripts.
    #[command(subcommand)]
    Game(GameCmd),
    /// Pebble game on two finite graphs.
    Ef {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        g: String,
        #[arg(long)]
        h: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum RainbowCmd {
    /// Build a rainbow atom structure.
    Build {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        greens: usize,
        #[arg(long, default_value_t = 3)]
        reds: usize,
        /// Split each red into this many superscripted copies.
        #[arg(long)]
        split: Option<usize>,
        #[arg(long, value_enum, default_value_t = VariantArg::Base)]
        variant: VariantArg,
        #[arg(long)]
        z_depth: Option<usize>,
        #[arg(long)]
        reds_count: Option<usize>,
        /// full, subsets or finite:k
        #[arg(long, default_value = "full")]
        yellows: String,
        #[arg(long)]
        shade_of_red: bool,
        #[arg(long, default_value_t = rainbow::DEFAULT_ATOM_CAP)]
        cap: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Base,
    Zn,
}

#[derive(Subcommand, Debug)]
pub enum BlurCmd {
    /// Check the blur conditions for a relation atom structure.
    Check {
        #[arg(long)]
        algebra: String,
        /// all:l for every l-set of non-identity atoms, or sets of atom
        /// names separated by ';' with names separated by ','.
        #[arg(long = "J")]
        j: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        strong: bool,
    },
    /// Blow up and blur a relation atom structure.
    Build {
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long)]
        trunc: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Basis,
    Hyperbasis,
    Relational,
}

#[derive(Subcommand, Debug)]
pub enum BasisCmd {
    /// Search for an m-dimensional basis or hyperbasis.
    Find {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Basis)]
        kind: KindArg,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BudgetArg {
    /// Cap on positions or networks explored.
    #[arg(long, env = "ATOMGAME_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Subcommand, Debug)]
pub enum GameCmd {
    /// Solve the atomic game exactly.
    Solve {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        m: usize,
        /// A round count or inf.
        #[arg(long)]
        rounds: String,
        #[arg(long)]
        reuse: bool,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Check a scripted ∀ strategy against every ∃ answer.
    VerifyScript {
        #[arg(long, conflicts_with = "rainbow")]
        algebra: Option<String>,
        /// n:G:R
        #[arg(long)]
        rainbow: Option<String>,
        #[arg(long, value_enum, default_value_t = VariantArg::Base)]
        variant: VariantArg,
        #[arg(long)]
        z_depth: Option<usize>,
        #[arg(long)]
        reds_count: Option<usize>,
        /// cones, or greedy:ATOM
        #[arg(long, default_value = "cones")]
        script: String,
        /// Cycle the cone tints through only this many tints.
        #[arg(long)]
        tint_pool: Option<usize>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        reuse: bool,
        #[arg(long, default_value_t = 10)]
        depth_bound: usize,
    },
}

/// What a run produced, before timing is attached.
pub struct Finding {
    pub parameters: Value,
    pub outcome: Value,
    pub witness: Value,
    pub budget: BudgetUsage,
    pub undecided: bool,
}

impl Finding {
    fn definite(parameters: Value, outcome: Value, witness: Value) -> Self {
        Finding {
            parameters,
            outcome,
            witness,
            budget: BudgetUsage {
                limit: None,
                explored: None,
            },
            undecided: false,
        }
    }

    fn with_budget(mut self, limit: usize, explored: Option<usize>) -> Self {
        self.budget = BudgetUsage {
            limit: Some(limit),
            explored,
        };
        self
    }
}

fn undecided(parameters: Value, limit: Option<usize>, explored: Option<usize>) -> Finding {
    Finding {
        parameters,
        outcome: json!({"status": "undecided", "reason": "budget"}),
        witness: Value::Null,
        budget: BudgetUsage { limit, explored },
        undecided: true,
    }
}

// ---- sources ----

fn parse_usize(s: &str, what: &str) -> anyhow::Result<usize> {
    s.parse().with_context(|| format!("bad {what} {s:?}"))
}

fn triple(spec: &str) -> anyhow::Result<(usize, usize, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, c] = parts[..] else {
        bail!("expected n:G:R, got {spec:?}");
    };
    Ok((parse_usize(a, "n")?, parse_usize(b, "greens")?, parse_usize(c, "reds")?))
}

fn alias(spec: &str) -> anyhow::Result<Option<Structure>> {
    if spec == "one-atom" {
        return Ok(Some(Structure::Ca(CaAtomStructure::one_atom(3))));
    }
    if let Some(n) = spec.strip_prefix("one-atom:") {
        let n = parse_usize(n, "dimension")?;
        if n < 3 {
            bail!("dimension {n} below 3");
        }
        return Ok(Some(Structure::Ca(CaAtomStructure::one_atom(n))));
    }
    if let Some(k) = spec.strip_prefix("maddux:") {
        return Ok(Some(Structure::Ra(atomgame_core::structures::maddux_ek23(parse_usize(k, "k")?)?)));
    }
    if let Some(rest) = spec.strip_prefix("rainbow:").or_else(|| spec.strip_prefix("rainbow ")) {
        let (n, g, r) = triple(rest)?;
        let rb = rainbow::build_rainbow_ca(&RainbowSignature::ca(n, g, r), RainbowVariant::Base, rainbow::DEFAULT_ATOM_CAP)?;
        return Ok(Some(Structure::Ca(rb.structure)));
    }
    if let Some(rest) = spec.strip_prefix("mat:") {
        let (n, inner) = rest.split_once(':').ok_or_else(|| anyhow!("expected mat:n:ALGEBRA"))?;
        let Structure::Ra(r) = load(inner)? else {
            bail!("mat:n: needs a relation atom structure");
        };
        return Ok(Some(Structure::Ca(basis::mat_n(&r, parse_usize(n, "n")?)?.structure)));
    }
    Ok(None)
}

/// Resolves a built-in alias or reads a JSON file. A missing `NAME.json`
/// falls back to the alias `NAME`.
pub fn load(spec: &str) -> anyhow::Result<Structure> {
    if let Some(s) = alias(spec)? {
        return Ok(s);
    }
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(stem) = spec.strip_suffix(".json") {
            if let Some(s) = alias(stem)? {
                return Ok(s);
            }
        }
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
    // A saved report from `blur build` or `rainbow build` carries its structure.
    if let Ok(report) = serde_json::from_str::<RunReport>(&text) {
        if let Some(inner) = report.witness.get("structure") {
            return Ok(io::parse_structure(&inner.to_string())?);
        }
    }
    Ok(io::parse_structure(&text)?)
}

fn load_ca(spec: &str) -> anyhow::Result<CaAtomStructure> {
    match load(spec)? {
        Structure::Ca(s) => Ok(s),
        Structure::Ra(_) => bail!("{spec} is a relation atom structure; a cylindric one is needed"),
    }
}

fn load_ra(spec: &str) -> anyhow::Result<RaAtomStructure> {
    match load(spec)? {
        Structure::Ra(r) => Ok(r),
        Structure::Ca(_) => bail!("{spec} is a cylindric atom structure; a relation one is needed"),
    }
}

/// `K<n>`, `C<n>`, `P<n>`, `E<n>`, or `n:a-b,c-d,...`.
pub fn parse_graph(spec: &str) -> anyhow::Result<Graph> {
    if let Some((n, edges)) = spec.split_once(':') {
        let n = parse_usize(n, "vertex count")?;
        let mut es = Vec::new();
        for e in edges.split(',').filter(|e| !e.is_empty()) {
            let (a, b) = e.split_once('-').ok_or_else(|| anyhow!("bad edge {e:?}"))?;
            es.push((parse_usize(a, "vertex")?, parse_usize(b, "vertex")?));
        }
        return Ok(Graph::from_edges(n, &es)?);
    }
    let (kind, n) = spec.split_at(1.min(spec.len()));
    let n = parse_usize(n, "vertex count")?;
    Ok(match kind {
        "K" => Graph::complete(n),
        "E" => Graph::from_edges(n, &[])?,
        "P" => Graph::from_edges(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>())?,
        "C" if n >= 3 => Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())?,
        _ => bail!("unknown graph {spec:?}"),
    })
}

fn parse_rounds(s: &str) -> anyhow::Result<Rounds> {
    match s {
        "inf" | "omega" | "ω" => Ok(Rounds::Omega),
        k => Ok(Rounds::Finite(parse_usize(k, "round count")?)),
    }
}

fn parse_yellows(s: &str) -> anyhow::Result<YellowFamily> {
    Ok(match s {
        "full" => YellowFamily::Full,
        "subsets" => YellowFamily::Subsets,
        other => match other.strip_prefix("finite:") {
            Some(k) => YellowFamily::FiniteSubsets { k: parse_usize(k, "k")? },
            None => bail!("unknown yellow family {s:?}"),
        },
    })
}

fn parse_blurs(r: &RaAtomStructure, spec: &str) -> anyhow::Result<Vec<atomgame_core::AtomSet>> {
    if let Some(l) = spec.strip_prefix("all:") {
        return Ok(BlurSpec::all_l_subsets(r.clone(), parse_usize(l, "l")?, 3).j);
    }
    spec.split(';')
        .map(|set| {
            let ids = set
                .split(',')
                .map(|name| {
                    r.atom_by_name(name.trim())
                        .ok_or_else(|| anyhow!("unknown atom {name:?}"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(atomgame_core::AtomSet::from_iter(r.len(), ids))
        })
        .collect()
}

// ---- commands ----

fn report_json(report: &atomgame_core::ValidationReport) -> Value {
    serde_json::to_value(&report.violations).expect("violations serialize")
}

fn validate(algebra: &str) -> anyhow::Result<Finding> {
    let s = load(algebra)?;
    let (kind, atoms, rep) = match &s {
        Structure::Ca(c) => ("ca", c.len(), validate_ca(c)?),
        Structure::Ra(r) => ("ra", r.len(), validate_ra(r)?),
    };
    Ok(Finding::definite(
        json!({"algebra": algebra}),
        json!({"kind": kind, "atoms": atoms, "valid": rep.ok}),
        json!({"violations": report_json(&rep)}),
    ))
}

#[allow(clippy::too_many_arguments)]
fn rainbow_build(
    n: usize,
    greens: usize,
    reds: usize,
    split: Option<usize>,
    variant: VariantArg,
    z_depth: Option<usize>,
    reds_count: Option<usize>,
    yellows: &str,
    shade_of_red: bool,
    cap: usize,
) -> anyhow::Result<Finding> {
    let mut sig = match variant {
        VariantArg::Base => RainbowSignature::ca(n, greens, reds),
        VariantArg::Zn => RainbowSignature::zn(n, z_depth.unwrap_or(greens), reds_count.unwrap_or(reds)),
    };
    sig.yellows = parse_yellows(yellows)?;
    sig.shade_of_red = shade_of_red;
    let params = json!({"signature": sig, "variant": format!("{variant:?}").to_lowercase(), "split": split, "cap": cap});
    let built = match (split, variant) {
        (Some(t), VariantArg::Base) => rainbow::split_reds(&sig, t, cap).map(Ok),
        (Some(_), VariantArg::Zn) => bail!("--split applies to the base variant only"),
        (None, v) => {
            let v = match v {
                VariantArg::Base => RainbowVariant::Base,
                VariantArg::Zn => RainbowVariant::Zn,
            };
            rainbow::build_rainbow_ca(&sig, v, cap).map(Err)
        }
    };
    let built = match built {
        Ok(b) => b,
        Err(Error::AtomCap { count, cap }) => return Ok(undecided(params, Some(cap), Some(count))),
        Err(e) => return Err(e.into()),
    };
    Ok(match built {
        Ok(sr) => {
            let rep = validate_ca(&sr.split.structure)?;
            let theta = rainbow::verify_theta_embedding(&sr.base.structure, &sr.split.structure, &sr.copy_map)?;
            Finding::definite(
                params,
                json!({
                    "base_atoms": sr.base.atoms.len(),
                    "atoms": sr.split.atoms.len(),
                    "valid": rep.ok,
                    "theta_embedding": theta.ok,
                }),
                json!({
                    "structure": io::ca_to_json(&sr.split.structure),
                    "violations": report_json(&rep),
                    "theta_violations": report_json(&theta),
                }),
            )
        }
        Err(rb) => {
            let rep = validate_ca(&rb.structure)?;
            Finding::definite(
                params,
                json!({"atoms": rb.atoms.len(), "valid": rep.ok}),
                json!({"structure": io::ca_to_json(&rb.structure), "violations": report_json(&rep)}),
            )
        }
    }
    .with_budget(cap, None))
}

fn blur_check(algebra: &str, j: &str, n: usize, strong: bool) -> anyhow::Result<Finding> {
    let r = load_ra(algebra)?;
    let blurs = parse_blurs(&r, j)?;
    let spec = BlurSpec {
        r,
        j: blurs,
        e: blur::IndexBlur::Arithmetic,
        n,
    };
    let rep = blur::check_blur(&spec, strong)?;
    Ok(Finding::definite(
        json!({"algebra": algebra, "J": j, "n": n, "strong": strong, "blurs": spec.j.len()}),
        json!({"ok": rep.ok(), "strong": strong}),
        json!({"conditions": rep.conditions}),
    ))
}

fn blur_build(base: &str, l: usize, trunc: usize, n: usize) -> anyhow::Result<Finding> {
    let r = load_ra(base)?;
    let spec = BlurSpec::all_l_subsets(r.clone(), l, n);
    let b = blur::blow_up_and_blur(&spec, trunc)?;
    let rep = validate_ra(&b.structure)?;
    let emb = blur::check_embedding_witness(&b, &r)?;
    Ok(Finding::definite(
        json!({"base": base, "l": l, "trunc": trunc, "n": n}),
        json!({"atoms": b.structure.len(), "triples": b.structure.triple_count(), "valid": rep.ok, "embedding": emb.ok}),
        json!({
            "structure": io::ra_to_json(&b.structure),
            "violations": report_json(&rep),
            "embedding_violations": report_json(&emb),
        }),
    ))
}

fn ra_network_json(r: &RaAtomStructure, x: &RaNetwork) -> Value {
    let rows: Vec<Vec<&str>> = (0..x.m)
        .map(|i| (0..x.m).map(|j| r.name(x.get(i, j))).collect())
        .collect();
    json!({"m": x.m, "labels": rows})
}

fn basis_find(algebra: &str, m: usize, kind: KindArg, budget: usize) -> anyhow::Result<Finding> {
    let params = json!({"algebra": algebra, "m": m, "kind": format!("{kind:?}").to_lowercase(), "budget": budget});
    if kind == KindArg::Relational {
        let r = load_ra(algebra)?;
        return Ok(match basis::find_relational_basis(&r, m, budget)? {
            RelationalOutcome::Found { members } => Finding::definite(
                params,
                json!({"exists": true, "members": members.len()}),
                json!({"members": members.iter().map(|x| ra_network_json(&r, x)).collect::<Vec<_>>()}),
            )
            .with_budget(budget, Some(members.len())),
            RelationalOutcome::NoBasis { uncovered, deletions } => Finding::definite(
                params,
                json!({"exists": false}),
                json!({
                    "uncovered": uncovered.iter().map(|&a| r.name(a)).collect::<Vec<_>>(),
                    "deletions": deletions,
                }),
            )
            .with_budget(budget, None),
            RelationalOutcome::Undecided { explored } => undecided(params, Some(budget), Some(explored)),
        });
    }
    let s = load_ca(algebra)?;
    let bk = match kind {
        KindArg::Hyperbasis => BasisKind::Hyperbasis,
        _ => BasisKind::Basis,
    };
    Ok(match basis::find_basis(&s, m, bk, budget)? {
        BasisOutcome::Found { members } => {
            let audited = basis::audit_basis(&s, m, bk, &members)?;
            Finding::definite(
                params,
                json!({"exists": true, "members": members.len(), "audited": audited}),
                json!({"members": members.iter().map(|x| x.to_json(&s)).collect::<Vec<_>>()}),
            )
            .with_budget(budget, Some(members.len()))
        }
        BasisOutcome::NoBasis { uncovered, deletions } => Finding::definite(
            params,
            json!({"exists": false}),
            json!({
                "uncovered": uncovered.iter().map(|&a| s.name(a)).collect::<Vec<_>>(),
                "deletions": deletions
                    .iter()
                    .map(|d| json!({"member": d.member.to_json(&s), "reason": d.reason}))
                    .collect::<Vec<_>>(),
            }),
        )
        .with_budget(budget, None),
        BasisOutcome::Undecided { explored } => undecided(params, Some(budget), Some(explored)),
    })
}

fn game_solve(algebra: &str, m: usize, rounds: &str, reuse: bool, budget: usize) -> anyhow::Result<Finding> {
    let s = load_ca(algebra)?;
    let rounds_v = parse_rounds(rounds)?;
    let mut cfg = GameConfig::new(m, rounds_v, reuse);
    cfg.budget = budget;
    let params = json!({"algebra": algebra, "m": m, "rounds": rounds, "reuse": reuse, "budget": budget});
    let out = game::solve_game(&s, &cfg)?;
    if let GameOutcome::Undecided { explored, .. } = out {
        return Ok(undecided(params, Some(budget), Some(explored)));
    }
    let audited = game::audit_outcome(&s, &cfg, &out)?;
    let winner = out.winner();
    Ok(Finding::definite(params, json!({"winner": winner, "audited": audited}), out.to_json(&s))
        .with_budget(budget, None))
}

fn verdict_json(s: &CaAtomStructure, v: &ScriptVerdict) -> (Value, Value) {
    match v {
        ScriptVerdict::ForallWins {
            opening,
            branches,
            depth,
        } => (
            json!({
                "winner": Player::Forall,
                "depth": depth,
                "tree_size": branches.iter().map(|b| b.size()).sum::<usize>(),
            }),
            json!({
                "kind": "proof_tree",
                "opening": s.name(*opening),
                "branches": branches.iter().map(|b| b.to_json(s)).collect::<Vec<_>>(),
            }),
        ),
        ScriptVerdict::Counterexample { play } => (
            json!({"winner": Value::Null, "script_survived_by": Player::Exists}),
            json!({
                "kind": "counterexample",
                "play": play
                    .iter()
                    .map(|(mv, net)| json!({
                        "move": mv.as_ref().map(|m| game::move_json(s, m)),
                        "response": net.to_json(s),
                    }))
                    .collect::<Vec<_>>(),
            }),
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn verify_script(
    algebra: Option<&str>,
    rainbow_spec: Option<&str>,
    variant: VariantArg,
    z_depth: Option<usize>,
    reds_count: Option<usize>,
    script: &str,
    tint_pool: Option<usize>,
    m: usize,
    reuse: bool,
    depth_bound: usize,
) -> anyhow::Result<Finding> {
    let cfg = GameConfig::new(m, Rounds::Omega, reuse);
    let mut params = json!({
        "algebra": algebra,
        "rainbow": rainbow_spec,
        "script": script,
        "m": m,
        "reuse": reuse,
        "depth_bound": depth_bound,
    });
    let (s, verdict) = match (algebra, rainbow_spec) {
        (_, Some(spec)) => {
            let (n, g, r) = triple(spec)?;
            let (sig, v) = match variant {
                VariantArg::Base => (RainbowSignature::ca(n, g, r), RainbowVariant::Base),
                VariantArg::Zn => (
                    RainbowSignature::zn(n, z_depth.unwrap_or(g), reds_count.unwrap_or(r)),
                    RainbowVariant::Zn,
                ),
            };
            params["signature"] = serde_json::to_value(&sig)?;
            params["variant"] = json!(format!("{variant:?}").to_lowercase());
            params["tint_pool"] = json!(tint_pool);
            if script != "cones" {
                bail!("rainbow structures take the cones script");
            }
            let rb = rainbow::build_rainbow_ca(&sig, v, rainbow::DEFAULT_ATOM_CAP)?;
            let sc = match tint_pool {
                Some(p) => ConeScript::with_tint_pool(&rb, p, sig.tints.len().saturating_sub(1), reuse)?,
                None => ConeScript::bombard(&rb, reuse)?,
            };
            let verdict = game::verify_script(&rb.structure, &cfg, &sc, depth_bound)?;
            (rb.structure, verdict)
        }
        (Some(a), None) => {
            let s = load_ca(a)?;
            let name = script
                .strip_prefix("greedy:")
                .ok_or_else(|| anyhow!("structures from --algebra take greedy:ATOM"))?;
            let opening = s.atom_by_name(name).ok_or_else(|| anyhow!("unknown atom {name:?}"))?;
            let verdict = game::verify_script(&s, &cfg, &GreedyScript { opening }, depth_bound)?;
            (s, verdict)
        }
        (None, None) => bail!("one of --algebra or --rainbow is required"),
    };
    let (outcome, witness) = verdict_json(&s, &verdict);
    Ok(Finding::definite(params, outcome, witness))
}

fn ef_run(p: usize, r: usize, g: &str, h: &str) -> anyhow::Result<Finding> {
    let gg = parse_graph(g)?;
    let hh = parse_graph(h)?;
    let winner = ef::ef_pebble(p, r, &gg, &hh);
    let min = ef::ef_min_rounds(p, &gg, &hh, r);
    Ok(Finding::definite(
        json!({"p": p, "r": r, "g": g, "h": h}),
        json!({"winner": winner, "min_forall_rounds": min}),
        Value::Null,
    ))
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> anyhow::Result<Finding> {
    match &cli.command {
        Command::Validate { algebra } => validate(algebra),
        Command::Rainbow(RainbowCmd::Build {
            n,
            greens,
            reds,
            split,
            variant,
            z_depth,
            reds_count,
            yellows,
            shade_of_red,
            cap,
        }) => rainbow_build(*n, *greens, *reds, *split, *variant, *z_depth, *reds_count, yellows, *shade_of_red, *cap),
        Command::Blur(BlurCmd::Check { algebra, j, n, strong }) => blur_check(algebra, j, *n, *strong),
        Command::Blur(BlurCmd::Build { base, l, trunc, n }) => blur_build(base, *l, *trunc, *n),
        Command::Basis(BasisCmd::Find { algebra, m, kind, budget }) => basis_find(algebra, *m, *kind, budget.budget),
        Command::Game(GameCmd::Solve {
            algebra,
            m,
            rounds,
            reuse,
            budget,
        }) => game_solve(algebra, *m, rounds, *reuse, budget.budget),
        Command::Game(GameCmd::VerifyScript {
            algebra,
            rainbow,
            variant,
            z_depth,
            reds_count,
            script,
            tint_pool,
            m,
            reuse,
            depth_bound,
        }) => verify_script(
            algebra.as_deref(),
            rainbow.as_deref(),
            *variant,
            *z_depth,
            *reds_count,
            script,
            *tint_pool,
            *m,
            *reuse,
            *depth_bound,
        ),
        Command::Ef { p, r, g, h } => ef_run(*p, *r, g, h),
    }
}

/// Parses `argv` (program name first), runs it, and returns the exit code
/// together with the text for standard output and standard error.
pub fn dispatch<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => (0, text, String::new()),
                _ => (1, String::new(), text),
            };
        }
    };
    if let Some(j) = cli.jobs {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let command: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    match execute(&cli) {
        Ok(f) => {
            let report = RunReport {
                schema: SCHEMA,
                command,
                parameters: f.parameters,
                outcome: f.outcome,
                witness: f.witness,
                timing: Timing {
                    elapsed_ms: start.elapsed().as_millis() as u64,
                },
                budget: f.budget,
            };
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            (if f.undecided { 2 } else { 0 }, text, String::new())
        }
        Err(e) => (1, String::new(), format!("error: {e:#}\n")),
    }
}
