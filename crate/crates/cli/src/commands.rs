//! The subcommands. Each returns a report that renders as a text line or a
//! single JSON line.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use quantimetric::fixpoint::{
    build_b, check_witness, gfp, reachable_pairs, BehaviourMap, Failure, GfpOptions, Verdict,
    Witness, WitnessJson,
};
use quantimetric::flift::oracle::{dist_extreme_bottleneck, dist_extreme_points, pow_couplings};
use quantimetric::flift::{hausdorff, EvalKind, EvaluationMap, FunctorId, FunctorValue};
use quantimetric::systems::{
    determinize, gen_fig1, lang_equiv_partition, shortest_distinguishing_word, AutomatonJson,
    DetCoalgebra, Nfa, SubsetState,
};
use quantimetric::upto::{combine, CombineMode, Partition, Technique};
use quantimetric::{Error, Quantale, QuantaleId, QuantaleValue, VRel};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::inputs::{load_automaton, load_json, load_witness, parse_subset, DemoValue, LiftDemoJson};

/// `b` for the determinization of `nfa`: the discounted machine lifting on
/// real quantales, the canonical one on `bool2`.
pub fn behaviour_map(nfa: Arc<Nfa>, quantale: QuantaleId, c: f64) -> Result<BehaviourMap<DetCoalgebra>> {
    let q = Quantale::new(quantale);
    let letters = nfa.alphabet_size();
    let ev = if quantale.is_real() {
        EvaluationMap::machine_discount(q, letters, c)?
    } else {
        EvaluationMap::machine_canonical(q, letters)?
    };
    Ok(build_b(determinize(nfa), ev)?)
}

fn with_cap_hint(e: Error, hint: &str) -> CliError {
    match e {
        Error::CapExceeded { .. } => CliError::Cap {
            message: format!("{e}; {hint}"),
            source: e,
        },
        other => other.into(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub quantale: QuantaleId,
    pub value: serde_json::Value,
    #[serde(skip)]
    pub raw: QuantaleValue,
    pub iterations: usize,
    pub pairs: usize,
    pub converged: bool,
    /// `c^len` from the shortest distinguishing word, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
}

impl fmt::Display for DistanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "distance({{{}}}, {{{}}}) = {} ({} iterations over {} pairs",
            self.left.join(","),
            self.right.join(","),
            self.raw,
            self.iterations,
            self.pairs
        )?;
        if !self.converged {
            f.write_str(", not converged")?;
        }
        f.write_str(")")?;
        if let Some(o) = self.oracle {
            write!(f, " oracle {o}")?;
        }
        Ok(())
    }
}

pub fn distance(path: &Path, left: &str, right: &str, cfg: &RunConfig, oracle: bool) -> Result<DistanceReport> {
    let nfa = Arc::new(load_automaton(path)?);
    let s1 = parse_subset(&nfa, left)?;
    let s2 = parse_subset(&nfa, right)?;
    distance_on(nfa, &s1, &s2, cfg, oracle)
}

/// Greatest fixpoint over the pairs reachable from `(s1, s2)`.
pub fn distance_on(
    nfa: Arc<Nfa>,
    s1: &SubsetState,
    s2: &SubsetState,
    cfg: &RunConfig,
    oracle: bool,
) -> Result<DistanceReport> {
    let q = Quantale::new(cfg.quantale);
    let b = behaviour_map(nfa.clone(), cfg.quantale, cfg.c)?;
    let pairs = reachable_pairs(&b, &[(s1.clone(), s2.clone())], cfg.cap).map_err(|e| {
        with_cap_hint(e, "raise --cap or certify a bound with check-witness instead")
    })?;
    let res = gfp(
        &b,
        pairs,
        GfpOptions {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
        },
    )?;
    let raw = res.get(s1, s2).expect("the query pair is enumerated");
    let oracle = if oracle && cfg.quantale.is_real() {
        let len = shortest_distinguishing_word(b.coalgebra(), s1, s2, cfg.cap)?;
        Some(len.map_or(0.0, |l| cfg.c.powi(l as i32)))
    } else {
        None
    };
    Ok(DistanceReport {
        left: nfa.subset_names(s1),
        right: nfa.subset_names(s2),
        quantale: cfg.quantale,
        value: q.encode(raw),
        raw,
        iterations: res.iterations,
        pairs: res.len(),
        converged: res.converged,
        oracle,
    })
}

pub const TECHNIQUES: &[&str] = &["id", "ref", "sym", "trn", "mtr", "bhv", "ctx-union", "cvx", "shrink"];

/// Composes the named techniques in list order. `bhv` uses language
/// equivalence classes of `interest`.
pub fn technique_for(
    names: &[String],
    det: &DetCoalgebra,
    interest: &[SubsetState],
    cap: usize,
) -> Result<Technique<SubsetState>> {
    let mut parts = Vec::new();
    for name in names {
        let t = match name.as_str() {
            "id" => Technique::identity(),
            "ref" => Technique::reflexive(),
            "sym" => Technique::symmetric(),
            "trn" => Technique::transitive(),
            "mtr" => Technique::metric(),
            "ctx-union" | "ctx" => Technique::ctx_union(),
            "bhv" => Technique::behavioural(Partition::new(lang_equiv_partition(det, interest, cap)?)?),
            "shrink" => Technique::shrink(),
            "cvx" => {
                return Err(CliError::Usage(
                    "cvx applies to distribution-valued systems, not to automata".into(),
                ))
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown technique `{other}` (known: {})",
                    TECHNIQUES.join(", ")
                )))
            }
        };
        parts.push(t);
    }
    Ok(combine(parts, CombineMode::Compose)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairOut {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimOut {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub bound: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FailureOut {
    ClaimAboveWitness {
        witness: serde_json::Value,
    },
    NotPostFixpoint {
        left: Vec<String>,
        right: Vec<String>,
        witness: serde_json::Value,
        lifted: serde_json::Value,
        #[serde(skip_serializing_if = "Option::is_none")]
        successor: Option<PairOut>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub certified: bool,
    pub technique: String,
    pub claim: ClaimOut,
    pub pairs_checked: usize,
    pub frontier: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureOut>,
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(","))
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let claim = format!("({}, {})", braces(&self.claim.left), braces(&self.claim.right));
        match &self.failure {
            None => write!(
                f,
                "certified {claim} at {} using [{}]; {} pairs checked, {} on the frontier",
                self.claim.bound, self.technique, self.pairs_checked, self.frontier
            ),
            Some(FailureOut::ClaimAboveWitness { witness }) => write!(
                f,
                "refuted {claim}: claimed {} but the witness gives {witness}",
                self.claim.bound
            ),
            Some(FailureOut::NotPostFixpoint {
                left,
                right,
                witness,
                lifted,
                successor,
            }) => {
                write!(
                    f,
                    "refuted at ({}, {}): witness {witness} exceeds b(f(d)) = {lifted} using [{}]",
                    braces(left),
                    braces(right),
                    self.technique
                )?;
                if let Some(s) = successor {
                    write!(f, "; offending successor ({}, {})", braces(&s.left), braces(&s.right))?;
                }
                Ok(())
            }
        }
    }
}

pub fn check_witness_file(
    automaton: &Path,
    witness: &Path,
    cfg: &RunConfig,
    allow_unsafe: bool,
) -> Result<CheckReport> {
    let nfa = Arc::new(load_automaton(automaton)?);
    let w = load_witness(witness, &nfa)?;
    check_witness_on(nfa, &w, cfg, allow_unsafe)
}

/// Checks a witness with the techniques of `cfg.upto`. The quantale comes
/// from the witness, as does the discount when the witness records one.
pub fn check_witness_on(
    nfa: Arc<Nfa>,
    w: &Witness<SubsetState>,
    cfg: &RunConfig,
    allow_unsafe: bool,
) -> Result<CheckReport> {
    let q = w.rel.quantale();
    let b = behaviour_map(nfa.clone(), q.id(), w.c.unwrap_or(cfg.c))?;
    let mut interest: Vec<SubsetState> = w
        .rel
        .entries()
        .flat_map(|(x, y, _)| [x.clone(), y.clone()])
        .chain([w.claim.left.clone(), w.claim.right.clone()])
        .collect();
    interest.sort();
    interest.dedup();
    let f = technique_for(&cfg.upto, b.coalgebra(), &interest, cfg.cap)?;
    let verdict: Verdict<SubsetState> = check_witness(w, &b, &f, allow_unsafe)?;
    let names = |s: &SubsetState| nfa.subset_names(s);
    let failure = verdict.failure.as_ref().map(|fl| match fl {
        Failure::ClaimAboveWitness { witness } => FailureOut::ClaimAboveWitness {
            witness: q.encode(*witness),
        },
        Failure::NotPostFixpoint {
            left,
            right,
            witness,
            lifted,
            successor,
        } => FailureOut::NotPostFixpoint {
            left: names(left),
            right: names(right),
            witness: q.encode(*witness),
            lifted: q.encode(*lifted),
            successor: successor.as_ref().map(|(l, r)| PairOut {
                left: names(l),
                right: names(r),
            }),
        },
    });
    Ok(CheckReport {
        certified: verdict.certified,
        technique: verdict.technique.clone(),
        claim: ClaimOut {
            left: names(&verdict.claim.left),
            right: names(&verdict.claim.right),
            bound: q.encode(verdict.claim.bound),
        },
        pairs_checked: verdict.pairs_checked,
        frontier: verdict.frontier,
        failure,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub left: Vec<String>,
    pub right: Vec<String>,
    /// Length of a shortest distinguishing word.
    pub length: Option<usize>,
    pub equivalent: bool,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.length {
            Some(l) => write!(f, "{l}"),
            None => f.write_str("equivalent"),
        }
    }
}

pub fn oracle(path: &Path, left: &str, right: &str, cfg: &RunConfig) -> Result<OracleReport> {
    let nfa = Arc::new(load_automaton(path)?);
    let s1 = parse_subset(&nfa, left)?;
    let s2 = parse_subset(&nfa, right)?;
    oracle_on(nfa, &s1, &s2, cfg)
}

pub fn oracle_on(nfa: Arc<Nfa>, s1: &SubsetState, s2: &SubsetState, cfg: &RunConfig) -> Result<OracleReport> {
    let det = determinize(nfa.clone());
    let length = shortest_distinguishing_word(&det, s1, s2, cfg.cap)
        .map_err(|e| with_cap_hint(e, "raise --cap"))?;
    Ok(OracleReport {
        left: nfa.subset_names(s1),
        right: nfa.subset_names(s2),
        length,
        equivalent: length.is_none(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    /// `None` when the naive enumeration hit the cap.
    pub naive_pairs: Option<usize>,
    pub naive_time: Option<f64>,
    pub upto_pairs: usize,
    pub upto_time: f64,
    pub certified: bool,
    pub distance: Option<f64>,
}

pub const BENCH_HEADER: [&str; 6] = ["n", "naive_pairs", "naive_time", "upto_pairs", "upto_time", "distance"];

impl BenchRow {
    pub fn record(&self) -> [String; 6] {
        let cap = || "cap".to_string();
        [
            self.n.to_string(),
            self.naive_pairs.map_or_else(cap, |p| p.to_string()),
            self.naive_time.map_or_else(cap, |t| format!("{t:.6}")),
            self.upto_pairs.to_string(),
            format!("{:.6}", self.upto_time),
            self.distance.map_or_else(|| "n/a".into(), |d| d.to_string()),
        ]
    }

    pub fn json(&self) -> serde_json::Value {
        let cap = serde_json::Value::from("cap");
        serde_json::json!({
            "n": self.n,
            "naive_pairs": self.naive_pairs.map_or(cap.clone(), serde_json::Value::from),
            "naive_time": self.naive_time.map_or(cap, serde_json::Value::from),
            "upto_pairs": self.upto_pairs,
            "upto_time": self.upto_time,
            "certified": self.certified,
            "distance": self.distance,
        })
    }
}

/// The two-chain family for each `n` in `from..=to`: naive fixpoint over
/// all reachable pairs against certification of the canonical witness up
/// to `ref,ctx-union`.
pub fn bench(from: usize, to: usize, cfg: &RunConfig) -> Result<Vec<BenchRow>> {
    if from < 1 || from > to {
        return Err(CliError::Usage(format!("bad range {from}..={to}; need 1 ≤ from ≤ to")));
    }
    let q = Quantale::unit_interval();
    let mut upto_cfg = cfg.clone();
    upto_cfg.quantale = QuantaleId::UnitIntervalRev;
    upto_cfg.upto = vec!["ref".into(), "ctx-union".into()];
    let mut rows = Vec::new();
    for n in from..=to {
        let nfa = Arc::new(gen_fig1(n)?);
        let x0 = nfa.subset(&["x0"])?;
        let y0 = nfa.subset(&["y0"])?;

        let start = Instant::now();
        let naive = match distance_on(nfa.clone(), &x0, &y0, &upto_cfg, false) {
            Ok(r) => Some(r),
            Err(e) if e.status() == crate::error::ExitStatus::Cap => None,
            Err(e) => return Err(e),
        };
        let naive_time = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let w = Witness::fig1(&nfa, n, cfg.c)?;
        let check = check_witness_on(nfa.clone(), &w, &upto_cfg, false)?;
        let upto_time = start.elapsed().as_secs_f64();

        let distance = match &naive {
            Some(r) => Some(q.to_real(r.raw)),
            None if check.certified => Some(q.to_real(w.claim.bound)),
            None => None,
        };
        rows.push(BenchRow {
            n,
            naive_pairs: naive.as_ref().map(|r| r.pairs),
            naive_time: naive.as_ref().map(|_| naive_time),
            upto_pairs: check.pairs_checked,
            upto_time,
            certified: check.certified,
            distance,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum LiftKind {
    Hausdorff,
    Wasserstein,
    Canonical,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftRow {
    pub left: DemoValue,
    pub right: DemoValue,
    pub value: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
}

impl fmt::Display for LiftRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left.render(), self.right.render(), self.value)?;
        if let (Some(o), Some(a)) = (&self.oracle, self.agree) {
            write!(f, " oracle {o} {}", if a { "agree" } else { "DIFFER" })?;
        }
        Ok(())
    }
}

enum Lifted {
    Set(Vec<usize>),
    Dist(FunctorValue<usize>),
}

pub fn lift_demo(kind: LiftKind, path: &Path, cfg: &RunConfig, oracle: bool) -> Result<Vec<LiftRow>> {
    let input: LiftDemoJson = load_json(path)?;
    let q = Quantale::new(input.quantale);
    let index: HashMap<&str, usize> = input
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    if index.len() != input.elements.len() {
        return Err(CliError::Usage("duplicate element names".into()));
    }
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| CliError::Usage(format!("unknown element `{name}`")))
    };
    let mut d = VRel::constant(q, q.decode(&input.relation.default)?)?;
    if let Some(diag) = &input.relation.diagonal {
        d.set_diagonal(Some(q.decode(diag)?))?;
    }
    for (x, y, v) in &input.relation.entries {
        d.set(lookup(x)?, lookup(y)?, q.decode(v)?)?;
    }
    let convert = |v: &DemoValue| -> Result<Lifted> {
        Ok(match v {
            DemoValue::Set(xs) => Lifted::Set(xs.iter().map(|x| lookup(x)).collect::<Result<_>>()?),
            DemoValue::Dist(m) => Lifted::Dist(FunctorValue::dist(
                m.iter()
                    .map(|(x, p)| Ok((lookup(x)?, *p)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
        })
    };
    let pow = EvaluationMap::pow_canonical(q).with_limits(cfg.limits);
    let mut rows = Vec::new();
    for pair in &input.pairs {
        let (value, check) = match (convert(&pair.left)?, convert(&pair.right)?) {
            (Lifted::Set(a), Lifted::Set(b)) => {
                let value = match kind {
                    LiftKind::Hausdorff => hausdorff(&d, &a, &b)?,
                    _ => pow.wasserstein(&d, &FunctorValue::pow(a.clone()), &FunctorValue::pow(b.clone()))?,
                };
                let check = if oracle {
                    Some(pow_couplings(&pow, &d, &a, &b, cfg.limits.coupling_max_enum)?)
                } else {
                    None
                };
                (value, check)
            }
            (Lifted::Dist(a), Lifted::Dist(b)) => {
                let ev_kind = match kind {
                    LiftKind::Hausdorff => {
                        return Err(CliError::Usage("hausdorff needs sets, not distributions".into()))
                    }
                    LiftKind::Wasserstein => EvalKind::DistExpectation,
                    LiftKind::Canonical => EvalKind::DistCanonical,
                };
                let ev = EvaluationMap::new(FunctorId::Dist, ev_kind, q)?.with_limits(cfg.limits);
                let value = ev.wasserstein(&d, &a, &b)?;
                let check = if oracle {
                    let (FunctorValue::Dist(ma), FunctorValue::Dist(mb)) = (&a, &b) else {
                        unreachable!("constructed as distributions")
                    };
                    let supply: Vec<f64> = ma.iter().map(|(_, m)| *m).collect();
                    let demand: Vec<f64> = mb.iter().map(|(_, m)| *m).collect();
                    let cost: Vec<Vec<f64>> = ma
                        .iter()
                        .map(|(x, _)| mb.iter().map(|(y, _)| q.to_real(d.get(x, y))).collect())
                        .collect();
                    let r = match kind {
                        LiftKind::Wasserstein => dist_extreme_points(&supply, &demand, &cost)?,
                        _ => dist_extreme_bottleneck(&supply, &demand, &cost)?,
                    };
                    Some(q.from_real(r)?)
                } else {
                    None
                };
                (value, check)
            }
            _ => return Err(CliError::Usage("a pair mixes a set with a distribution".into())),
        };
        rows.push(LiftRow {
            left: pair.left.clone(),
            right: pair.right.clone(),
            value: q.encode(value),
            oracle: check.map(|c| q.encode(c)),
            agree: check.map(|c| q.approx_eq(value, c)).transpose()?,
        });
    }
    Ok(rows)
}

pub fn gen_fig1_json(n: usize) -> Result<AutomatonJson> {
    Ok(gen_fig1(n)?.to_json())
}

/// The canonical witness for the two-chain automaton of size `n`,
/// optionally with a different claimed bound.
pub fn gen_witness_json(n: usize, c: f64, bound: Option<f64>) -> Result<WitnessJson> {
    let nfa = gen_fig1(n)?;
    let mut w = Witness::fig1(&nfa, n, c)?;
    if let Some(b) = bound {
        w.claim.bound = w.rel.quantale().from_real(b)?;
    }
    Ok(w.to_json(&nfa))
}
