//! JSON documents: scenarios (input), allocations with certificates
//! (output), and convergence traces.
//!
//! Every rational travels as a `"p/q"` string and every interval as a
//! half-open `["start", "end"]` pair. Parse errors name the offending field
//! with a path such as `players[1].density[0][2]`.

use std::fmt;

use num_traits::Signed;
use serde_json::{json, Map, Value};

use crate::density::StepDensity;
use crate::error::{Error, Result};
use crate::interval::{canonicalize, IntervalSet};
use crate::rational::{self, Rational};
use crate::trace::{geometric_bound, ConvergenceTrace, RoundRecord, Tracked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Strong,
    Chore,
    Charge,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Strong => "strong",
            Mode::Chore => "chore",
            Mode::Charge => "charge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Player {
    pub name: String,
    pub density: StepDensity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub mode: Mode,
    pub epsilon: Rational,
    pub players: Vec<Player>,
}

impl Scenario {
    pub fn densities(&self) -> Vec<StepDensity> {
        self.players.iter().map(|p| p.density.clone()).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.players.iter().map(|p| p.name.clone()).collect()
    }
}

/// A document failed to parse or validate; `path` locates the field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocError {
    pub path: String,
    pub message: String,
}

impl DocError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        DocError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for DocError {}

type DocResult<T> = std::result::Result<T, DocError>;

fn parse_json(text: &str) -> DocResult<Value> {
    serde_json::from_str(text).map_err(|e| DocError::at("", format!("invalid JSON: {e}")))
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> DocResult<&'a Value> {
    let obj = obj
        .as_object()
        .ok_or_else(|| DocError::at(path, "expected an object"))?;
    obj.get(key)
        .ok_or_else(|| DocError::at(join(path, key), "missing field"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn array<'a>(v: &'a Value, path: &str) -> DocResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| DocError::at(path, "expected an array"))
}

fn string<'a>(v: &'a Value, path: &str) -> DocResult<&'a str> {
    v.as_str().ok_or_else(|| DocError::at(path, "expected a string"))
}

fn rational_at(v: &Value, path: &str) -> DocResult<Rational> {
    let s = string(v, path)?;
    rational::parse(s).map_err(|e| DocError::at(path, e.to_string()))
}

fn rational_value(q: &Rational) -> Value {
    Value::String(rational::format(q))
}

fn rationals_value(qs: &[Rational]) -> Value {
    Value::Array(qs.iter().map(rational_value).collect())
}

fn parse_mode(v: &Value, path: &str) -> DocResult<Mode> {
    match string(v, path)? {
        "strong" => Ok(Mode::Strong),
        "chore" => Ok(Mode::Chore),
        "charge" => Ok(Mode::Charge),
        other => Err(DocError::at(
            path,
            format!("unknown mode {other:?} (expected strong, chore or charge)"),
        )),
    }
}

fn parse_density(v: &Value, path: &str, mode: Mode) -> DocResult<StepDensity> {
    let rows = array(v, path)?;
    if rows.is_empty() {
        return Err(DocError::at(path, "density has no pieces"));
    }
    let mut pieces = Vec::with_capacity(rows.len());
    let mut cursor = rational::zero();
    for (k, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{k}]");
        let cells = array(row, &row_path)?;
        if cells.len() != 3 {
            return Err(DocError::at(&row_path, "expected [start, end, value]"));
        }
        let start = rational_at(&cells[0], &format!("{row_path}[0]"))?;
        let end = rational_at(&cells[1], &format!("{row_path}[1]"))?;
        let value = rational_at(&cells[2], &format!("{row_path}[2]"))?;
        if start > cursor {
            return Err(DocError::at(
                format!("{row_path}[0]"),
                format!("gap in tiling: [{}, {}) is not covered", rational::format(&cursor), rational::format(&start)),
            ));
        }
        if start < cursor {
            return Err(DocError::at(
                format!("{row_path}[0]"),
                format!("overlap in tiling: piece starts at {} before {}", rational::format(&start), rational::format(&cursor)),
            ));
        }
        if end <= start {
            return Err(DocError::at(format!("{row_path}[1]"), "piece end must exceed its start"));
        }
        if end > rational::one() {
            return Err(DocError::at(format!("{row_path}[1]"), "piece extends beyond 1"));
        }
        if mode != Mode::Charge && value.is_negative() {
            return Err(DocError::at(
                format!("{row_path}[2]"),
                format!("negative value {} not allowed in {} mode", rational::format(&value), mode.as_str()),
            ));
        }
        cursor = end.clone();
        pieces.push((start, end, value));
    }
    if cursor != rational::one() {
        return Err(DocError::at(
            path,
            format!("gap in tiling: [{}, 1) is not covered", rational::format(&cursor)),
        ));
    }
    StepDensity::new(pieces).map_err(|e| DocError::at(path, e.to_string()))
}

pub fn parse_scenario(text: &str) -> DocResult<Scenario> {
    let doc = parse_json(text)?;
    let mode = parse_mode(field(&doc, "mode", "")?, "mode")?;
    let epsilon = rational_at(field(&doc, "epsilon", "")?, "epsilon")?;
    if !epsilon.is_positive() {
        return Err(DocError::at("epsilon", "must be positive"));
    }
    let players_v = array(field(&doc, "players", "")?, "players")?;
    if players_v.is_empty() {
        return Err(DocError::at("players", "at least one player is required"));
    }
    let mut players = Vec::with_capacity(players_v.len());
    for (i, p) in players_v.iter().enumerate() {
        let path = format!("players[{i}]");
        let name = string(field(p, "name", &path)?, &join(&path, "name"))?.to_string();
        if players.iter().any(|q: &Player| q.name == name) {
            return Err(DocError::at(join(&path, "name"), format!("duplicate player name {name:?}")));
        }
        let density_path = join(&path, "density");
        let density = parse_density(field(p, "density", &path)?, &density_path, mode)?;
        players.push(Player { name, density });
    }
    Ok(Scenario { mode, epsilon, players })
}

pub fn scenario_to_json(s: &Scenario) -> Value {
    json!({
        "mode": s.mode.as_str(),
        "epsilon": rational::format(&s.epsilon),
        "players": s.players.iter().map(|p| json!({
            "name": p.name,
            "density": p.density.pieces().iter().map(|piece| json!([
                rational::format(&piece.start),
                rational::format(&piece.end),
                rational::format(&piece.value),
            ])).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn intervals_value(set: &IntervalSet) -> Value {
    Value::Array(
        set.intervals()
            .iter()
            .map(|iv| json!([rational::format(&iv.start), rational::format(&iv.end)]))
            .collect(),
    )
}

/// Parses `[["p/q","p/q"], ...]` into a canonical set.
pub fn parse_intervals(v: &Value, path: &str) -> DocResult<IntervalSet> {
    let rows = array(v, path)?;
    let mut raw = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{k}]");
        let pair = array(row, &row_path)?;
        if pair.len() != 2 {
            return Err(DocError::at(&row_path, "expected [start, end]"));
        }
        raw.push((
            rational_at(&pair[0], &format!("{row_path}[0]"))?,
            rational_at(&pair[1], &format!("{row_path}[1]"))?,
        ));
    }
    canonicalize(&raw).map_err(|e| DocError::at(path, e.to_string()))
}

/// Cross-violation values recorded when a participant was frozen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreezeEntry {
    pub frozen: usize,
    pub remainder_measure: Rational,
    /// Cell index when produced by a charge division.
    pub cell: Option<usize>,
    pub cross: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub envy_matrix: Vec<Vec<Rational>>,
    pub max_strong_violation: Rational,
    pub max_gentleman_violation: Rational,
    pub remainder_measures_at_truncation: Vec<Rational>,
    /// Tolerance at which the mode's condition is guaranteed to hold.
    pub certified_bound: Rational,
    pub freezes: Vec<FreezeEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationDoc {
    pub mode: Option<Mode>,
    pub parts: Vec<(String, IntervalSet)>,
    pub certificate: Option<Certificate>,
}

pub fn allocation_to_json(doc: &AllocationDoc) -> Value {
    let names: Vec<&str> = doc.parts.iter().map(|(n, _)| n.as_str()).collect();
    let mut out = Map::new();
    if let Some(mode) = doc.mode {
        out.insert("mode".into(), json!(mode.as_str()));
    }
    out.insert(
        "parts".into(),
        Value::Array(
            doc.parts
                .iter()
                .map(|(name, set)| json!({ "name": name, "intervals": intervals_value(set) }))
                .collect(),
        ),
    );
    if let Some(c) = &doc.certificate {
        let freezes: Vec<Value> = c
            .freezes
            .iter()
            .map(|f| {
                let mut entry = json!({
                    "frozen": names[f.frozen],
                    "remainder_measure": rational::format(&f.remainder_measure),
                    "cross": f.cross.iter().enumerate().map(|(j, v)| json!({
                        "player": names[j],
                        "value": rational::format(v),
                    })).collect::<Vec<_>>(),
                });
                if let Some(cell) = f.cell {
                    entry["cell"] = json!(cell);
                }
                entry
            })
            .collect();
        out.insert(
            "certificate".into(),
            json!({
                "envy_matrix": c.envy_matrix.iter().map(|row| rationals_value(row)).collect::<Vec<_>>(),
                "max_strong_violation": rational::format(&c.max_strong_violation),
                "max_gentleman_violation": rational::format(&c.max_gentleman_violation),
                "remainder_measures_at_truncation": rationals_value(&c.remainder_measures_at_truncation),
                "certified_bound": rational::format(&c.certified_bound),
                "freezes": freezes,
            }),
        );
    }
    Value::Object(out)
}

fn rationals_at(v: &Value, path: &str) -> DocResult<Vec<Rational>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, x)| rational_at(x, &format!("{path}[{k}]")))
        .collect()
}

fn parse_certificate(v: &Value, names: &[String]) -> DocResult<Certificate> {
    let path = "certificate";
    let matrix_path = join(path, "envy_matrix");
    let envy_matrix = array(field(v, "envy_matrix", path)?, &matrix_path)?
        .iter()
        .enumerate()
        .map(|(i, row)| rationals_at(row, &format!("{matrix_path}[{i}]")))
        .collect::<DocResult<Vec<_>>>()?;
    let scalar = |key: &str| rational_at(field(v, key, path)?, &join(path, key));
    let index_of = |name: &str, p: &str| {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DocError::at(p, format!("unknown player {name:?}")))
    };
    let mut freezes = Vec::new();
    if let Some(fv) = v.get("freezes") {
        let fpath = join(path, "freezes");
        for (k, f) in array(fv, &fpath)?.iter().enumerate() {
            let epath = format!("{fpath}[{k}]");
            let frozen_path = join(&epath, "frozen");
            let frozen = index_of(string(field(f, "frozen", &epath)?, &frozen_path)?, &frozen_path)?;
            let remainder_measure = rational_at(field(f, "remainder_measure", &epath)?, &join(&epath, "remainder_measure"))?;
            let cell = f.get("cell").and_then(Value::as_u64).map(|c| c as usize);
            let cpath = join(&epath, "cross");
            let mut cross = vec![rational::zero(); names.len()];
            for (j, c) in array(field(f, "cross", &epath)?, &cpath)?.iter().enumerate() {
                let item = format!("{cpath}[{j}]");
                let who_path = join(&item, "player");
                let who = index_of(string(field(c, "player", &item)?, &who_path)?, &who_path)?;
                cross[who] = rational_at(field(c, "value", &item)?, &join(&item, "value"))?;
            }
            freezes.push(FreezeEntry {
                frozen,
                remainder_measure,
                cell,
                cross,
            });
        }
    }
    Ok(Certificate {
        envy_matrix,
        max_strong_violation: scalar("max_strong_violation")?,
        max_gentleman_violation: scalar("max_gentleman_violation")?,
        remainder_measures_at_truncation: rationals_at(
            field(v, "remainder_measures_at_truncation", path)?,
            &join(path, "remainder_measures_at_truncation"),
        )?,
        certified_bound: scalar("certified_bound")?,
        freezes,
    })
}

pub fn parse_allocation(text: &str) -> DocResult<AllocationDoc> {
    let doc = parse_json(text)?;
    let mode = match doc.get("mode") {
        Some(m) => Some(parse_mode(m, "mode")?),
        None => None,
    };
    let parts_v = array(field(&doc, "parts", "")?, "parts")?;
    let mut parts = Vec::with_capacity(parts_v.len());
    for (i, p) in parts_v.iter().enumerate() {
        let path = format!("parts[{i}]");
        let name = string(field(p, "name", &path)?, &join(&path, "name"))?.to_string();
        let set = parse_intervals(field(p, "intervals", &path)?, &join(&path, "intervals"))?;
        parts.push((name, set));
    }
    let names: Vec<String> = parts.iter().map(|(n, _)| n.clone()).collect();
    let certificate = match doc.get("certificate") {
        Some(c) => Some(parse_certificate(c, &names)?),
        None => None,
    };
    Ok(AllocationDoc { mode, parts, certificate })
}

/// One emitted trace row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub s: usize,
    pub cutter: usize,
    pub tracked: Tracked,
    pub per_player_remainder: Vec<Rational>,
    pub averaged: Rational,
    pub bound: Rational,
    pub cell: Option<usize>,
}

/// Recomputes each round's bound from its participant count, exponent and
/// base, and refuses to emit a row whose tracked value exceeds it.
pub fn trace_rows(trace: &ConvergenceTrace, cell: Option<usize>) -> Result<Vec<TraceRow>> {
    trace
        .rounds
        .iter()
        .map(|rec: &RoundRecord| {
            let bound = geometric_bound(rec.active, rec.exponent, &rec.base);
            if bound != rec.bound {
                return Err(Error::invariant(format!("round {}: recorded bound disagrees with recomputation", rec.s)));
            }
            if rec.averaged > bound {
                return Err(Error::invariant(format!("round {}: tracked remainder exceeds its bound", rec.s)));
            }
            Ok(TraceRow {
                s: rec.s,
                cutter: rec.cutter,
                tracked: rec.tracked,
                per_player_remainder: rec.per_player_remainder.clone(),
                averaged: rec.averaged.clone(),
                bound,
                cell,
            })
        })
        .collect()
}

pub fn emit_trace(trace: &ConvergenceTrace) -> Result<Value> {
    Ok(trace_rows_to_json(&trace_rows(trace, None)?))
}

pub fn trace_rows_to_json(rows: &[TraceRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let mut v = json!({
                    "s": row.s,
                    "cutter": row.cutter,
                    "tracked": row.tracked.as_str(),
                    "per_player_remainder": rationals_value(&row.per_player_remainder),
                    "averaged": rational::format(&row.averaged),
                    "bound": rational::format(&row.bound),
                });
                if let Some(c) = row.cell {
                    v["cell"] = json!(c);
                }
                v
            })
            .collect(),
    )
}

pub fn parse_trace(text: &str) -> DocResult<Vec<TraceRow>> {
    let doc = parse_json(text)?;
    array(&doc, "")?
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let path = format!("[{k}]");
            let uint = |key: &str| {
                field(row, key, &path)?
                    .as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| DocError::at(join(&path, key), "expected a non-negative integer"))
            };
            let tracked = match string(field(row, "tracked", &path)?, &join(&path, "tracked"))? {
                "mean" => Tracked::Mean,
                "lead" => Tracked::Lead,
                other => return Err(DocError::at(join(&path, "tracked"), format!("unknown tracked quantity {other:?}"))),
            };
            Ok(TraceRow {
                s: uint("s")?,
                cutter: uint("cutter")?,
                tracked,
                per_player_remainder: rationals_at(
                    field(row, "per_player_remainder", &path)?,
                    &join(&path, "per_player_remainder"),
                )?,
                averaged: rational_at(field(row, "averaged", &path)?, &join(&path, "averaged"))?,
                bound: rational_at(field(row, "bound", &path)?, &join(&path, "bound"))?,
                cell: row.get("cell").and_then(Value::as_u64).map(|c| c as usize),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    const UNIFORM_PAIR: &str = r#"{"mode":"strong","epsilon":"1/100","players":[
        {"name":"a","density":[["0","1","1"]]},
        {"name":"b","density":[["0","1","1"]]}]}"#;

    #[test]
    fn parses_uniform_pair() {
        let s = parse_scenario(UNIFORM_PAIR).unwrap();
        assert_eq!(s.mode, Mode::Strong);
        assert_eq!(s.epsilon, ratio(1, 100));
        assert_eq!(s.names(), vec!["a", "b"]);
        assert_eq!(s.players[0].density, StepDensity::uniform());
    }

    #[test]
    fn gap_is_named() {
        let text = r#"{"mode":"strong","epsilon":"1/100","players":[{"name":"a","density":[["0","1/2","1"]]}]}"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.path, "players[0].density");
        assert!(err.message.contains("gap"), "{err}");
    }

    #[test]
    fn negative_value_rejected_in_strong_mode() {
        let text = r#"{"mode":"strong","epsilon":"1/100","players":[{"name":"a","density":[["0","1","-1"]]}]}"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.path, "players[0].density[0][2]");
        let charge = text.replace("strong", "charge");
        assert!(parse_scenario(&charge).is_ok());
    }

    #[test]
    fn unicode_minus_is_malformed() {
        let text = r#"{"mode":"charge","epsilon":"1/100","players":[{"name":"a","density":[["0","1","−1"]]}]}"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.path, "players[0].density[0][2]");
        assert!(err.message.contains("malformed rational"));
    }

    #[test]
    fn other_errors() {
        let unknown = UNIFORM_PAIR.replace("strong", "fancy");
        assert_eq!(parse_scenario(&unknown).unwrap_err().path, "mode");
        let overlap = r#"{"mode":"chore","epsilon":"1/2","players":[{"name":"a","density":[["0","1/2","1"],["1/3","1","1"]]}]}"#;
        let err = parse_scenario(overlap).unwrap_err();
        assert_eq!(err.path, "players[0].density[1][0]");
        assert!(err.message.contains("overlap"));
        let no_eps = r#"{"mode":"chore","players":[]}"#;
        assert_eq!(parse_scenario(no_eps).unwrap_err().path, "epsilon");
        let zero_eps = UNIFORM_PAIR.replace("1/100", "0");
        assert_eq!(parse_scenario(&zero_eps).unwrap_err().path, "epsilon");
        assert!(parse_scenario("not json").unwrap_err().message.contains("invalid JSON"));
    }

    #[test]
    fn scenario_round_trip() {
        let s = parse_scenario(UNIFORM_PAIR).unwrap();
        let again = parse_scenario(&scenario_to_json(&s).to_string()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn allocation_round_trip() {
        let doc = AllocationDoc {
            mode: Some(Mode::Chore),
            parts: vec![
                ("a".into(), IntervalSet::interval(int(0), ratio(1, 3)).unwrap()),
                ("b".into(), IntervalSet::interval(ratio(1, 3), int(1)).unwrap()),
            ],
            certificate: Some(Certificate {
                envy_matrix: vec![vec![ratio(1, 3), ratio(2, 3)], vec![ratio(1, 3), ratio(2, 3)]],
                max_strong_violation: ratio(1, 3),
                max_gentleman_violation: ratio(1, 3),
                remainder_measures_at_truncation: vec![int(0), ratio(1, 7)],
                certified_bound: ratio(1, 2),
                freezes: vec![FreezeEntry {
                    frozen: 0,
                    remainder_measure: ratio(1, 9),
                    cell: None,
                    cross: vec![int(0), ratio(1, 5)],
                }],
            }),
        };
        let text = allocation_to_json(&doc).to_string();
        assert_eq!(parse_allocation(&text).unwrap(), doc);
    }

    #[test]
    fn empty_trace_emits_empty_array() {
        let t = ConvergenceTrace::new(vec![int(1)]);
        assert_eq!(emit_trace(&t).unwrap(), json!([]));
    }

    #[test]
    fn tampered_bound_is_refused() {
        let mut t = ConvergenceTrace::new(vec![int(1), int(1)]);
        t.rounds.push(RoundRecord {
            s: 1,
            cutter: 1,
            tracked: Tracked::Mean,
            per_player_remainder: vec![int(1), int(1)],
            averaged: int(1),
            bound: ratio(1, 2),
            active: 2,
            exponent: 1,
            base: int(1),
        });
        assert!(emit_trace(&t).is_err());
    }
}
