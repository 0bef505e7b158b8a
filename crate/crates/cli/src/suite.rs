//! The lemma-property suite run by `dendrodyn verify`.

use dendrodyn::dynamics::{
    check_escape, check_imposs, check_no_preperiodic, check_property_a, classify_recurrence, periodic_structure,
    returns_to_components, EscapeReport, PropertyAViolation,
};
use dendrodyn::io::point_json;
use dendrodyn::pl_map::iterate;
use dendrodyn::tree::TreePoint;
use dendrodyn::{Map, Point, Result};
use serde_json::{json, Value};

use crate::Bounds;

/// Powers of `f` whose fixed sets are checked for connectedness.
const MAX_FIXED_SET_POWER: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not_applicable",
        }
    }
}

pub struct LemmaResult {
    pub name: &'static str,
    pub status: Status,
    pub detail: Value,
}

impl LemmaResult {
    pub fn to_json(&self) -> Value {
        json!({"lemma": self.name, "status": self.status.label(), "detail": self.detail})
    }
}

/// Runs every check. The fixed-set and total-return checks run only when
/// `identity_power` is known.
pub fn run(f: &Map, samples: &[Point], identity_power: Option<u64>, bounds: &Bounds) -> Result<Vec<LemmaResult>> {
    let tree = f.tree();
    let pj = |p: &Point| point_json(tree, p);
    let mut out = Vec::new();
    // Sample orbits are followed for the horizon, not the full period bound.
    let orbit_steps = bounds.horizon.min(bounds.max_period);

    let report = check_property_a(f, samples, orbit_steps);
    let first = report.violations.first().map(|v| match v {
        PropertyAViolation::NotSurjective { missed } => json!({"kind": "not_surjective", "missed": pj(missed)}),
        PropertyAViolation::NotFullyInvariant { point, orbit_point } => {
            json!({"kind": "not_fully_invariant", "point": pj(point), "orbit_point": pj(orbit_point)})
        }
        PropertyAViolation::OutsideOmegaLimit { point, .. } => json!({"kind": "outside_omega_limit", "point": pj(point)}),
    });
    out.push(LemmaResult {
        name: "property_a",
        status: Status::of(report.passed()),
        detail: json!({"surjective": report.surjective, "violations": report.violations.len(), "first": first}),
    });

    let report = check_no_preperiodic(f, orbit_steps, samples);
    let first = report.violations.first().map(|w| {
        json!({
            "point": pj(&w.point), "preperiod": w.preperiod, "period": w.period,
            "power": w.power, "image": pj(&w.image), "separator": pj(&w.separator),
        })
    });
    out.push(LemmaResult {
        name: "no_preperiodic",
        status: Status::of(report.passed()),
        detail: json!({"checked": report.checked, "violations": report.violations.len(), "first": first}),
    });

    let mut imposs_violations = 0;
    let mut first = None;
    for n in 1..=bounds.depth as u64 {
        let report = check_imposs(f, n, samples, bounds.piece_cap)?;
        imposs_violations += report.violations.len();
        if first.is_none() {
            first = report
                .violations
                .first()
                .map(|v| json!({"n": n, "fixed": pj(&v.fixed), "t": pj(&v.t), "image": pj(&v.image)}));
        }
    }
    out.push(LemmaResult {
        name: "imposs",
        status: Status::of(imposs_violations == 0),
        detail: json!({"powers": bounds.depth, "violations": imposs_violations, "first": first}),
    });

    let escape = check_escape(f, 1, samples, bounds.horizon, bounds.depth as u64, bounds.piece_cap)?;
    out.push(match &escape {
        EscapeReport::HypothesisNotMet { periodic_cutpoint, period } => LemmaResult {
            name: "escape",
            status: Status::NotApplicable,
            detail: json!({"periodic_cutpoint": pj(periodic_cutpoint), "period": period}),
        },
        EscapeReport::Checked { points_checked, violations } => LemmaResult {
            name: "escape",
            status: Status::of(violations.is_empty()),
            detail: json!({
                "checked": points_checked,
                "violations": violations.len(),
                "first": violations.first().map(|v| json!({"point": pj(&v.point), "step": v.step, "position": pj(&v.position)})),
            }),
        },
    });

    let mut mismatches = Vec::new();
    for k in [2u64, 3] {
        let g = iterate(f, k, bounds.piece_cap)?;
        for x in samples {
            let a = classify_recurrence(f, x, bounds.horizon).recurrent();
            let b = classify_recurrence(&g, x, bounds.horizon).recurrent();
            if let (Some(a), Some(b)) = (a, b) {
                if a != b {
                    mismatches.push(json!({"point": pj(x), "power": k, "under_f": a, "under_power": b}));
                }
            }
        }
    }
    out.push(LemmaResult {
        name: "recurrent_points_of_powers",
        status: Status::of(mismatches.is_empty()),
        detail: json!({"powers": [2, 3], "mismatches": mismatches}),
    });

    match identity_power {
        Some(n) => {
            let top = n.min(MAX_FIXED_SET_POWER);
            let structure = periodic_structure(f, top, bounds.max_period, bounds.piece_cap)?;
            let disconnected: Vec<u64> = (1..=top)
                .filter(|&i| {
                    let set = structure.fixed_set(i).expect("computed up to top");
                    !set.is_empty() && !set.is_connected(tree)
                })
                .collect();
            out.push(LemmaResult {
                name: "connected_fixed_sets",
                status: Status::of(disconnected.is_empty()),
                detail: json!({"powers_checked": top, "disconnected": disconnected}),
            });

            let mut failures = Vec::new();
            let vertices: Vec<Point> = tree.vertices().map(TreePoint::Vertex).collect();
            for x in samples {
                for y in vertices.iter().filter(|y| *y != x) {
                    for k in 1..=2 {
                        if !returns_to_components(f, x, y, k, bounds.horizon)?.returned() {
                            failures.push(json!({"point": pj(x), "separator": pj(y), "power": k}));
                        }
                    }
                }
            }
            out.push(LemmaResult {
                name: "totally_returning",
                status: Status::of(failures.is_empty()),
                detail: json!({"failures": failures}),
            });
        }
        None => {
            let reason = json!({"reason": "map is not known to be pointwise-recurrent"});
            out.push(LemmaResult { name: "connected_fixed_sets", status: Status::NotApplicable, detail: reason.clone() });
            out.push(LemmaResult { name: "totally_returning", status: Status::NotApplicable, detail: reason });
        }
    }
    Ok(out)
}
