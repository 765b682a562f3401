//! JSON descriptors and deterministic report emission.
//!
//! Two input formats: the ring descriptor and the map descriptor, both with
//! integer shorthand for elements of the prime subfield. All reports are
//! emitted with sorted object keys, so identical runs produce byte-identical
//! output.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::affine::{AffineCase, AffineReport, Certainty, FixedPoint};
use crate::dynamics::Classification;
use crate::engine::{DecompositionTree, EVector, Verdict};
use crate::error::{Error, Result};
use crate::ring::{Element, RingSpec};
use crate::series::ConvergentSeries;

/// On-disk ring descriptor.
///
/// ```json
/// {"p":2,"f":1,"unram_poly":[0,1],"e":2,"eis_poly":[[-2],[0],[1]],"precision":16}
/// ```
///
/// Polynomial coefficients are little-endian; Eisenstein coefficients are
/// unramified integers given as digit arrays in the unramified generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub p: u64,
    pub f: usize,
    pub unram_poly: Vec<i64>,
    pub e: usize,
    pub eis_poly: Vec<Vec<i64>>,
    pub precision: u32,
}

impl RingDescriptor {
    pub fn parse(text: &str) -> Result<RingDescriptor> {
        serde_json::from_str(text).map_err(|e| Error::Descriptor(format!("ring descriptor: {e}")))
    }

    pub fn build(&self) -> Result<RingSpec> {
        RingSpec::new(self.p, self.f, &self.unram_poly, self.e, &self.eis_poly, self.precision)
    }

    /// Builds the ring with the working precision overridden.
    pub fn build_with_precision(&self, precision: u32) -> Result<RingSpec> {
        RingSpec::new(self.p, self.f, &self.unram_poly, self.e, &self.eis_poly, precision)
    }
}

/// An element literal: an integer of the prime subfield, or a `pi`-adic
/// coefficient array `[[c00,c01,..],[c10,..],..]` (outer index the power of
/// `pi`, inner the power of the unramified generator).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementLiteral {
    Int(i64),
    PiPoly(Vec<Vec<i64>>),
}

impl ElementLiteral {
    pub fn build(&self, ring: &RingSpec) -> Result<Element> {
        match self {
            ElementLiteral::Int(n) => Ok(ring.integer(*n as i128)),
            ElementLiteral::PiPoly(coeffs) => ring.from_pi_poly(coeffs),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ElementLiteral::Int(n) => Some(*n),
            ElementLiteral::PiPoly(_) => None,
        }
    }

    pub fn parse(text: &str) -> Result<ElementLiteral> {
        serde_json::from_str(text).map_err(|e| Error::Descriptor(format!("element literal: {e}")))
    }
}

/// On-disk map descriptor.
///
/// ```json
/// {"type":"poly","coeffs":[1,1]}
/// {"type":"series","coeffs":[...],"tail_val":16}
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapDescriptor {
    #[serde(rename = "type")]
    pub kind: String,
    pub coeffs: Vec<ElementLiteral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_val: Option<u32>,
}

impl MapDescriptor {
    pub fn parse(text: &str) -> Result<MapDescriptor> {
        serde_json::from_str(text).map_err(|e| Error::Descriptor(format!("map descriptor: {e}")))
    }

    pub fn build(&self, ring: &RingSpec) -> Result<ConvergentSeries> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.build(ring))
            .collect::<Result<Vec<_>>>()?;
        match self.kind.as_str() {
            "poly" => ConvergentSeries::poly(ring, coeffs),
            "series" => {
                let tail = self.tail_val.ok_or_else(|| {
                    Error::Descriptor("series descriptor requires tail_val".into())
                })?;
                ConvergentSeries::new(ring, coeffs, tail)
            }
            other => Err(Error::Descriptor(format!("unknown map type {other:?}"))),
        }
    }
}

/// Canonicalizes a JSON value: objects get sorted keys. `serde_json`'s
/// default map already sorts, so serializing a `Value` is deterministic.
pub fn to_stable_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("valid json")
}

fn evec_json(ev: &EVector) -> Value {
    json!({
        "prefix": ev.prefix(),
        "eventual": ev.eventual(),
        "stabilization_index": ev.stabilization_index(),
    })
}

fn class_json(ring: &RingSpec, class: &Classification) -> Value {
    match class {
        Classification::PartiallySplits { ell, fixed_digit } => json!({
            "name": class.name(),
            "ell": ell,
            "fixed_digit": ring.fq().rank(fixed_digit),
        }),
        _ => json!({ "name": class.name() }),
    }
}

fn verdict_json(ring: &RingSpec, v: &Verdict) -> Value {
    match v {
        Verdict::AttractingPeriodic { period } => json!({
            "kind": "attracting_periodic",
            "period": period,
        }),
        Verdict::IndifferentPeriodic { period, certified_to, exact_at_precision } => json!({
            "kind": "indifferent_periodic",
            "period": period,
            "certified_to_level": certified_to,
            "exact_at_precision": exact_at_precision,
        }),
        Verdict::MinimalType { descr } => json!({
            "kind": "minimal_type",
            "level": descr.level,
            "k": descr.k,
            "evec": evec_json(&descr.evec),
            "odometer_head": descr.evec.odometer_head(descr.k, ring.p(), 8),
        }),
        Verdict::Unresolved { needed_level } => json!({
            "kind": "unresolved",
            "needed_level": needed_level,
        }),
    }
}

/// Full decomposition report. Nodes appear in creation order (deterministic
/// canonical order), each with its cycle data, classification and verdict.
pub fn tree_json(ring: &RingSpec, tree: &DecompositionTree) -> Value {
    let nodes: Vec<Value> = tree
        .nodes
        .iter()
        .map(|n| {
            let reps: Vec<String> = n
                .cycle
                .reps
                .iter()
                .map(|&r| ring.digit_string(&ring.unrank(r, n.cycle.level)))
                .collect();
            json!({
                "id": n.id,
                "parent": n.parent,
                "level": n.cycle.level,
                "length": n.cycle.len(),
                "reps": reps,
                "class": class_json(ring, &n.class),
                "A_hat": n.a_hat,
                "B": match n.b_val {
                    crate::ring::Valuation::Finite(v) => json!(v),
                    crate::ring::Valuation::AtLeast(_) => json!("inf"),
                },
                "children": n.children,
                "verdict": n.verdict.as_ref().map(|v| verdict_json(ring, v)),
            })
        })
        .collect();
    let basins: Vec<Value> = tree
        .basins
        .iter()
        .map(|b| {
            let balls: Vec<String> = b
                .ranks
                .iter()
                .map(|&r| ring.digit_string(&ring.unrank(r, b.level)))
                .collect();
            json!({
                "level": b.level,
                "balls": balls,
                "target": b.target,
            })
        })
        .collect();
    let components: Vec<Value> = tree
        .minimal_components()
        .iter()
        .map(|c| {
            json!({
                "anchor_node": c.anchor_node,
                "level": c.descr.level,
                "k": c.descr.k,
                "evec": evec_json(&c.descr.evec),
                "odometer_head": c.descr.evec.odometer_head(c.descr.k, ring.p(), 8),
                "leaf_count": c.leaf_count,
            })
        })
        .collect();
    let periodic: Vec<Value> = tree
        .periodic_orbits()
        .iter()
        .map(|&(id, period, kind)| json!({ "node": id, "period": period, "kind": kind }))
        .collect();
    json!({
        "ring": { "p": ring.p(), "e": ring.e(), "f": ring.f(), "precision": ring.precision() },
        "start_level": tree.start_level,
        "max_level": tree.max_level,
        "nodes": nodes,
        "basins": basins,
        "summary": {
            "minimal_components": components,
            "periodic_orbits": periodic,
            "unresolved": tree.unresolved_count(),
        },
    })
}

/// DOT export: nodes labelled `k@n:class`, leaves colored by verdict.
pub fn tree_dot(tree: &DecompositionTree) -> String {
    let mut out = String::from("digraph decomposition {\n");
    for n in &tree.nodes {
        let label = format!("{}@{}:{}", n.cycle.len(), n.cycle.level, n.class.name());
        let color = match &n.verdict {
            Some(Verdict::MinimalType { .. }) => "palegreen",
            Some(Verdict::AttractingPeriodic { .. }) => "lightcoral",
            Some(Verdict::IndifferentPeriodic { .. }) => "orange",
            Some(Verdict::Unresolved { .. }) => "yellow",
            None => "white",
        };
        out.push_str(&format!(
            "  n{} [label=\"{}\", style=filled, fillcolor={}];\n",
            n.id, label, color
        ));
    }
    for n in &tree.nodes {
        for &c in &n.children {
            out.push_str(&format!("  n{} -> n{};\n", n.id, c));
        }
    }
    for (i, b) in tree.basins.iter().enumerate() {
        out.push_str(&format!(
            "  b{} [label=\"basin@{}:{} balls\", style=filled, fillcolor=lightgray];\n",
            i,
            b.level,
            b.ranks.len()
        ));
        out.push_str(&format!("  n{} -> b{} [style=dashed];\n", b.target, i));
    }
    out.push_str("}\n");
    out
}

/// Cycle census report for one level: every cycle with its classification
/// and invariants, plus the tail points.
pub fn cycles_report(
    ring: &RingSpec,
    phi: &ConvergentSeries,
    level: u32,
    cap: u64,
) -> Result<Value> {
    let map = crate::dynamics::induce(ring, phi, level, cap)?;
    let set = crate::dynamics::find_cycles(&map);
    let mut list = Vec::new();
    for c in &set.cycles {
        let inv = crate::dynamics::invariants(ring, phi, c)?;
        let class = crate::dynamics::classify(ring, &inv);
        let reps: Vec<String> = c
            .reps
            .iter()
            .map(|&r| ring.digit_string(&ring.unrank(r, c.level)))
            .collect();
        let mut obj = json!({
            "level": c.level,
            "length": c.len(),
            "reps": reps,
            "class": class.name(),
            "A_hat": inv.a_hat,
            "B": match inv.b_val {
                crate::ring::Valuation::Finite(v) => json!(v),
                crate::ring::Valuation::AtLeast(_) => json!("inf"),
            },
        });
        if let Classification::PartiallySplits { ell, .. } = class {
            obj["ell"] = json!(ell);
        }
        list.push(obj);
    }
    let tails: Vec<Value> = set
        .tails
        .iter()
        .map(|&(r, target)| {
            json!({
                "ball": ring.digit_string(&ring.unrank(r, level)),
                "enters_cycle": target,
            })
        })
        .collect();
    Ok(json!({ "level": level, "cycles": list, "tails": tails }))
}

fn certainty_json(c: Certainty) -> Value {
    match c {
        Certainty::Exact => json!("exact"),
        Certainty::AtPrecision => json!("at_precision"),
    }
}

/// Affine analysis report.
pub fn affine_json(ring: &RingSpec, rep: &AffineReport) -> Value {
    let fixed = rep.fixed_point.as_ref().map(|fp| match fp {
        FixedPoint::Integral(x) => {
            let digits = ring
                .reduce(x, ring.precision().min(12))
                .map(|c| ring.digit_string(&c))
                .unwrap_or_default();
            json!({ "in_ring": true, "digits": digits })
        }
        FixedPoint::Outside { valuation } => json!({ "in_ring": false, "valuation": valuation }),
    });
    let case = match &rep.case {
        AffineCase::Translation { evec } => json!({
            "name": "translation",
            "type_k": 1,
            "anchor_level": 0,
            "evec": evec_json(evec),
            "note": "every radius-one ball is invariant and carries the full odometer",
        }),
        AffineCase::Attractor => json!({
            "name": "attractor",
            "basin": "all of K",
        }),
        AffineCase::RootOfUnity { ell, certainty } => json!({
            "name": "root_of_unity",
            "ell": ell,
            "certainty": certainty_json(*certainty),
        }),
        AffineCase::UnitSpheres { ell, v_star, evec, component_count, certainty } => json!({
            "name": "unit_spheres",
            "ell": ell,
            "v_star": v_star,
            "evec": evec_json(evec),
            "components_per_sphere": component_count,
            "certainty": certainty_json(*certainty),
            "note": "every sphere pi^-n U is invariant and conjugate to the unit sphere",
        }),
    };
    json!({
        "ring": { "p": ring.p(), "e": ring.e(), "f": ring.f() },
        "case": case,
        "fixed_point": fixed,
    })
}
