use std::collections::HashSet;
use std::fmt;

use super::design::{Design, LinkTier, StageKind};
use super::grid::manhattan_distance;

/// One broken invariant, naming the offending router or link.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    SelfLink { link: usize },
    DuplicateLink { link: usize, first: usize },
    ManhattanLength { link: usize, stored: u32, actual: u32 },
    DegreeBound { router: usize, degree: usize, max: usize },
    Connectivity { router: usize },
    Placement(String),
    TierCompatibility {
        link: usize,
        tier: LinkTier,
        router: usize,
        stage: StageKind,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Shape(_) => "shape",
            Violation::SelfLink { .. } => "self-link",
            Violation::DuplicateLink { .. } => "duplicate-link",
            Violation::ManhattanLength { .. } => "manhattan-length",
            Violation::DegreeBound { .. } => "degree-bound",
            Violation::Connectivity { .. } => "connectivity",
            Violation::Placement(_) => "placement",
            Violation::TierCompatibility { .. } => "tier-compatibility",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.kind())?;
        match self {
            Violation::Shape(msg) | Violation::Placement(msg) => f.write_str(msg),
            Violation::SelfLink { link } => write!(f, "link {link} joins a router to itself"),
            Violation::DuplicateLink { link, first } => {
                write!(f, "link {link} duplicates link {first}")
            }
            Violation::ManhattanLength {
                link,
                stored,
                actual,
            } => write!(f, "link {link} has length {stored}, endpoints are {actual} apart"),
            Violation::DegreeBound {
                router,
                degree,
                max,
            } => write!(f, "router {router} has degree {degree} > {max}"),
            Violation::Connectivity { router } => {
                write!(f, "router {router} is unreachable from router 0")
            }
            Violation::TierCompatibility {
                link,
                tier,
                router,
                stage,
            } => write!(
                f,
                "{tier} link {link} attaches to {stage} of router {router} which is not on that tier"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks topology structure, placement, and link/stage tier compatibility.
pub fn validate_design(d: &Design) -> ValidationReport {
    let mut out = Vec::new();
    let t = &d.topology;
    let n = t.num_routers();

    let mut structural = false;
    if t.max_ports < 2 {
        out.push(Violation::Shape(format!("max_ports {} < 2", t.max_ports)));
    }
    if d.tiers.stage.len() != n {
        out.push(Violation::Shape(format!(
            "{} stage tier rows for {n} routers",
            d.tiers.stage.len()
        )));
        structural = true;
    }
    if d.tiers.link.len() != t.links.len() {
        out.push(Violation::Shape(format!(
            "{} link tiers for {} links",
            d.tiers.link.len(),
            t.links.len()
        )));
        structural = true;
    }

    let mut seen = std::collections::HashMap::new();
    for (id, l) in t.links.iter().enumerate() {
        if l.a >= n || l.b >= n {
            out.push(Violation::Shape(format!("link {id} references a missing router")));
            structural = true;
            continue;
        }
        if l.a == l.b {
            out.push(Violation::SelfLink { link: id });
        }
        let key = (l.a.min(l.b), l.a.max(l.b));
        if let Some(&first) = seen.get(&key) {
            out.push(Violation::DuplicateLink { link: id, first });
        } else {
            seen.insert(key, id);
        }
        let actual = manhattan_distance(t.routers[l.a], t.routers[l.b]);
        if actual != l.manhattan_len {
            out.push(Violation::ManhattanLength {
                link: id,
                stored: l.manhattan_len,
                actual,
            });
        }
    }
    if structural {
        return ValidationReport { violations: out };
    }

    for (router, deg) in t.degrees().into_iter().enumerate() {
        if deg + 1 > t.max_ports {
            out.push(Violation::DegreeBound {
                router,
                degree: deg,
                max: t.max_ports - 1,
            });
        }
    }
    for router in t.disconnected_routers() {
        out.push(Violation::Connectivity { router });
    }

    if t.placement.len() != n {
        out.push(Violation::Placement(format!(
            "{} cores for {n} routers",
            t.placement.len()
        )));
    } else {
        let distinct: HashSet<_> = t.placement.iter().copied().collect();
        if distinct.len() != n || t.placement.iter().any(|&r| r >= n) {
            out.push(Violation::Placement(
                "core placement is not a bijection onto routers".into(),
            ));
        }
    }

    for (id, (l, &tier)) in t.links.iter().zip(&d.tiers.link).enumerate() {
        for router in [l.a, l.b] {
            for stage in [StageKind::Vca, StageKind::Swa] {
                if !d.tiers.stage_tier(router, stage).compatible_with(tier) {
                    out.push(Violation::TierCompatibility {
                        link: id,
                        tier,
                        router,
                        stage,
                    });
                }
            }
        }
    }

    ValidationReport { violations: out }
}
