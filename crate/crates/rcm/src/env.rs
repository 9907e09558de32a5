//! Conductance environments on finite lattices.
//!
//! An environment assigns a nonnegative conductance to every nearest-neighbor
//! edge (one value per undirected edge, so the symmetry omega_xy = omega_yx
//! holds by construction). The walk at x jumps to y with probability
//! omega_xy / pi(x) where pi(x) = sum of incident conductances; pi is the
//! stationary and reversible measure of that chain.
//!
//! Environments are deterministic functions of (law, domain, seed): each edge
//! (or lattice line) addresses its own position in a counter-based random
//! stream, so construction order never changes the sample.

use crate::domain::{BoundaryMode, LatticeDomain};
use crate::error::{RcmError, Result};
use crate::rng::{self, tag};
use serde::{Deserialize, Serialize};

pub const MAGIC: &[u8; 4] = b"RCM1";

/// Marginal distribution for a single conductance draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistributionSpec {
    Constant { value: f64 },
    Uniform { a: f64, b: f64 },
    TwoPoint { v1: f64, p1: f64, v2: f64 },
    LogUniform { a: f64, b: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Constant { value } => {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(RcmError::invalid("distribution.value", "must be finite and >= 0"));
                }
            }
            DistributionSpec::Uniform { a, b } => {
                if !(a >= 0.0) || !(b >= a) || !b.is_finite() {
                    return Err(RcmError::invalid("distribution.a/b", "need 0 <= a <= b < inf"));
                }
            }
            DistributionSpec::TwoPoint { v1, p1, v2 } => {
                if !(0.0..=1.0).contains(&p1) {
                    return Err(RcmError::invalid("distribution.p1", "need 0 <= p1 <= 1"));
                }
                if !(v1 >= 0.0) || !(v2 >= 0.0) || !v1.is_finite() || !v2.is_finite() {
                    return Err(RcmError::invalid("distribution.v1/v2", "values must be finite and >= 0"));
                }
            }
            DistributionSpec::LogUniform { a, b } => {
                if !(a > 0.0) || !(b >= a) || !b.is_finite() {
                    return Err(RcmError::invalid("distribution.a/b", "need 0 < a <= b < inf"));
                }
            }
        }
        Ok(())
    }

    /// Map one uniform draw in [0,1) through the distribution.
    pub fn sample(&self, u: f64) -> f64 {
        match *self {
            DistributionSpec::Constant { value } => value,
            DistributionSpec::Uniform { a, b } => a + (b - a) * u,
            DistributionSpec::TwoPoint { v1, p1, v2 } => {
                if u < p1 {
                    v1
                } else {
                    v2
                }
            }
            DistributionSpec::LogUniform { a, b } => a * (b / a).powf(u),
        }
    }
}

/// Placement of a Fig.-style trap: a unit core edge whose every other
/// incident edge carries conductance `strength`, with the access vertex tied
/// to the origin of the box by a unit-conductance path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    /// 1/n in the construction; shield edges carry this value.
    pub strength: f64,
    /// Coordinates of the lower core-edge endpoint.
    pub location: Vec<i64>,
    pub background: Box<EnvironmentLaw>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentLaw {
    Iid { distribution: DistributionSpec },
    Percolation { p: f64 },
    LineConstant { distribution: DistributionSpec },
    Constant { value: f64 },
    Trap(TrapSpec),
}

impl EnvironmentLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentLaw::Iid { distribution } | EnvironmentLaw::LineConstant { distribution } => {
                distribution.validate()
            }
            EnvironmentLaw::Percolation { p } => {
                if !(0.0..=1.0).contains(p) {
                    Err(RcmError::invalid("law.p", "need 0 <= p <= 1"))
                } else {
                    Ok(())
                }
            }
            EnvironmentLaw::Constant { value } => {
                if !(*value >= 0.0) || !value.is_finite() {
                    Err(RcmError::invalid("law.value", "must be finite and >= 0"))
                } else {
                    Ok(())
                }
            }
            EnvironmentLaw::Trap(spec) => {
                if !(spec.strength > 0.0) || !spec.strength.is_finite() {
                    return Err(RcmError::invalid("law.trap.strength", "must be finite and > 0"));
                }
                spec.background.validate()
            }
        }
    }
}

/// Geometry of a built trap, reported so experiments can assemble the
/// path/entry/confinement/exit factors exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrapGeometry {
    /// Lower endpoint of the core edge.
    pub core_lo: usize,
    /// Upper endpoint (core_lo + e_1).
    pub core_hi: usize,
    /// Access vertex beyond the core (core_lo + 2 e_1); the edge access-core_hi
    /// is a shield edge.
    pub access: usize,
    /// Unit path from the access vertex to the origin vertex (inclusive on
    /// both ends); empty when the origin lies on the core.
    pub path: Vec<usize>,
    pub strength: f64,
}

/// One conductance value per canonical undirected edge, plus the cached pi.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    domain: LatticeDomain,
    cond: Vec<f64>,
    pi: Vec<f64>,
}

impl Environment {
    pub fn from_edge_values(domain: LatticeDomain, cond: Vec<f64>) -> Result<Self> {
        if cond.len() != domain.num_edges() {
            return Err(RcmError::Consistency(format!(
                "expected {} edge values, got {}",
                domain.num_edges(),
                cond.len()
            )));
        }
        for (e, &w) in cond.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(RcmError::invalid(
                    "conductance",
                    format!("edge {e} has inadmissible value {w}"),
                ));
            }
        }
        let pi = compute_pi(&domain, &cond);
        Ok(Environment { domain, cond, pi })
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn edge_values(&self) -> &[f64] {
        &self.cond
    }

    pub fn num_vertices(&self) -> usize {
        self.domain.num_vertices()
    }

    /// Conductance of the edge from `v` along +axis (0 when absent).
    pub fn conductance(&self, v: usize, axis: usize) -> f64 {
        match self.domain.edge_index(v, axis) {
            Some(e) => self.cond[e],
            None => 0.0,
        }
    }

    /// Conductance between `v` and a signed neighbor.
    pub fn conductance_signed(&self, v: usize, axis: usize, sign: i64) -> f64 {
        if sign > 0 {
            self.conductance(v, axis)
        } else {
            match self.domain.neighbor(v, axis, -1) {
                Some(w) => self.conductance(w, axis),
                None => 0.0,
            }
        }
    }

    /// pi(x) = sum of incident conductances (respecting the boundary mode).
    pub fn pi(&self, v: usize) -> f64 {
        self.pi[v]
    }

    pub fn pi_values(&self) -> &[f64] {
        &self.pi
    }

    pub fn max_pi(&self) -> f64 {
        self.pi.iter().cloned().fold(0.0, f64::max)
    }

    /// Incident positive-conductance neighbors as (neighbor, omega).
    pub fn weighted_neighbors(&self, v: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.domain.dimension());
        for (axis, sign, w) in self.domain.neighbors(v) {
            let c = self.conductance_signed(v, axis, sign);
            if c > 0.0 {
                out.push((w, c));
            }
        }
        out
    }

    /// Transition probabilities P(v, .) = omega / pi over the existing
    /// neighbors, in canonical neighbor order (+0,-0,+1,-1,...). The last
    /// positive entry takes the residual so the row sums to 1 exactly.
    pub fn transition_row(&self, v: usize) -> Result<Vec<(usize, f64)>> {
        let pi = self.pi[v];
        if pi <= 0.0 {
            return Err(RcmError::DegenerateVertex { vertex: v });
        }
        let mut row = Vec::with_capacity(2 * self.domain.dimension());
        for axis in 0..self.domain.dimension() {
            for sign in [1i64, -1] {
                if let Some(w) = self.domain.neighbor(v, axis, sign) {
                    let c = self.conductance_signed(v, axis, sign);
                    row.push((w, c / pi));
                }
            }
        }
        // assign the residual to the last positive entry
        if let Some(last_pos) = row.iter().rposition(|&(_, p)| p > 0.0) {
            let partial: f64 = row
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != last_pos)
                .map(|(_, &(_, p))| p)
                .sum();
            row[last_pos].1 = 1.0 - partial;
        }
        Ok(row)
    }

    // -- serialization ------------------------------------------------------

    /// Binary format: magic "RCM1", u32 dimension, d x u32 sides, u8 boundary
    /// mode, then one little-endian f64 per canonical edge.
    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.domain.dimension();
        let mut out = Vec::with_capacity(4 + 4 + 4 * d + 1 + 8 * self.cond.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(d as u32).to_le_bytes());
        for &s in self.domain.sides() {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out.push(self.domain.boundary_mode().to_byte());
        for &w in &self.cond {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let take = |offset: usize, len: usize| -> Result<&[u8]> {
            bytes
                .get(offset..offset + len)
                .ok_or_else(|| RcmError::Format("truncated environment stream".into()))
        };
        if take(0, 4)? != MAGIC {
            return Err(RcmError::Format("bad magic bytes (expected RCM1)".into()));
        }
        let d = u32::from_le_bytes(take(4, 4)?.try_into().unwrap()) as usize;
        if d == 0 || d > 16 {
            return Err(RcmError::Format(format!("inadmissible dimension {d}")));
        }
        let mut sides = Vec::with_capacity(d);
        for i in 0..d {
            sides.push(u32::from_le_bytes(take(8 + 4 * i, 4)?.try_into().unwrap()));
        }
        let mode = BoundaryMode::from_byte(take(8 + 4 * d, 1)?[0])?;
        let domain = LatticeDomain::new(sides, mode)?;
        let header = 9 + 4 * d;
        let m = domain.num_edges();
        if bytes.len() != header + 8 * m {
            return Err(RcmError::Format(format!(
                "expected {} bytes for {} edges, got {}",
                header + 8 * m,
                m,
                bytes.len()
            )));
        }
        let mut cond = Vec::with_capacity(m);
        for e in 0..m {
            cond.push(f64::from_le_bytes(take(header + 8 * e, 8)?.try_into().unwrap()));
        }
        Environment::from_edge_values(domain, cond)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Debug<'a> {
            magic: &'a str,
            dimension: usize,
            sides: &'a [u32],
            boundary: BoundaryMode,
            edge_values: &'a [f64],
        }
        serde_json::to_string_pretty(&Debug {
            magic: "RCM1",
            dimension: self.domain.dimension(),
            sides: self.domain.sides(),
            boundary: self.domain.boundary_mode(),
            edge_values: &self.cond,
        })
        .expect("environment debug json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Debug {
            magic: String,
            dimension: usize,
            sides: Vec<u32>,
            boundary: BoundaryMode,
            edge_values: Vec<f64>,
        }
        let dbg: Debug =
            serde_json::from_str(text).map_err(|e| RcmError::Format(format!("json: {e}")))?;
        if dbg.magic != "RCM1" {
            return Err(RcmError::Format("bad magic field".into()));
        }
        if dbg.dimension != dbg.sides.len() {
            return Err(RcmError::Format("dimension/sides mismatch".into()));
        }
        let domain = LatticeDomain::new(dbg.sides, dbg.boundary)?;
        Environment::from_edge_values(domain, dbg.edge_values)
    }
}

fn compute_pi(domain: &LatticeDomain, cond: &[f64]) -> Vec<f64> {
    let mut pi = vec![0.0; domain.num_vertices()];
    for e in 0..cond.len() {
        let (v, w, _) = domain.edge_endpoints(e);
        pi[v] += cond[e];
        pi[w] += cond[e];
    }
    pi
}

/// Draw the environment for `(law, domain, seed)`. Deterministic; edge k
/// always consumes draw k of the edge stream, lines likewise.
pub fn build_environment(
    law: &EnvironmentLaw,
    domain: &LatticeDomain,
    seed: u64,
) -> Result<Environment> {
    law.validate()?;
    let m = domain.num_edges();
    let cond = match law {
        EnvironmentLaw::Constant { value } => vec![*value; m],
        EnvironmentLaw::Iid { distribution } => (0..m)
            .map(|e| distribution.sample(rng::u64_to_unit(rng::draw_u64_at(seed, tag::EDGE_VALUES, e as u64))))
            .collect(),
        EnvironmentLaw::Percolation { p } => (0..m)
            .map(|e| {
                let u = rng::u64_to_unit(rng::draw_u64_at(seed, tag::EDGE_VALUES, e as u64));
                if u < *p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        EnvironmentLaw::LineConstant { distribution } => build_line_constant(distribution, domain, seed),
        EnvironmentLaw::Trap(spec) => {
            return build_trap_environment(
                domain,
                spec.strength,
                &spec.location,
                &spec.background,
                seed,
            )
            .map(|(env, _)| env);
        }
    };
    Environment::from_edge_values(domain.clone(), cond)
}

/// One draw per full lattice line of parallel edges: for direction i, a line
/// is the set of edges (v, v+e_i) with all coordinates other than i fixed.
fn build_line_constant(
    distribution: &DistributionSpec,
    domain: &LatticeDomain,
    seed: u64,
) -> Vec<f64> {
    let d = domain.dimension();
    let mut cond = vec![0.0; domain.num_edges()];
    let mut line_offset = 0u64;
    for axis in 0..d {
        // number of lines = product of sides over other axes
        let lines: u64 = (0..d)
            .filter(|&a| a != axis)
            .map(|a| domain.sides()[a] as u64)
            .product();
        for e in 0..domain.num_edges() {
            let (v, _, ax) = domain.edge_endpoints(e);
            if ax != axis {
                continue;
            }
            let coords = domain.to_coords(v);
            // rank of the line among lines of this axis (lexicographic in the
            // transverse coordinates)
            let mut rank = 0u64;
            for a in 0..d {
                if a == axis {
                    continue;
                }
                rank = rank * domain.sides()[a] as u64 + coords[a] as u64;
            }
            let u = rng::u64_to_unit(rng::draw_u64_at(seed, tag::LINE_VALUES, line_offset + rank));
            cond[e] = distribution.sample(u);
        }
        line_offset += lines;
    }
    cond
}

/// Build the trap configuration: core edge {t, t+e1} of conductance 1, every
/// other edge incident to a core endpoint at `strength`, access vertex
/// t + 2 e1 joined to the origin of the domain by a unit-conductance
/// staircase path. Background fills the remaining edges.
pub fn build_trap_environment(
    domain: &LatticeDomain,
    strength: f64,
    location: &[i64],
    background: &EnvironmentLaw,
    seed: u64,
) -> Result<(Environment, TrapGeometry)> {
    let d = domain.dimension();
    if d < 2 {
        return Err(RcmError::Geometry("trap needs dimension >= 2".into()));
    }
    if location.len() != d {
        return Err(RcmError::Geometry("trap location has wrong dimension".into()));
    }
    if !(strength > 0.0) || !strength.is_finite() {
        return Err(RcmError::invalid("trap.strength", "must be finite and > 0"));
    }
    let sides = domain.sides();
    for (i, &c) in location.iter().enumerate() {
        let margin = if i == 0 { 3 } else { 2 };
        if c < 1 || c + margin > sides[i] as i64 {
            return Err(RcmError::Geometry(format!(
                "trap does not fit: coordinate {i} = {c} too close to the boundary"
            )));
        }
    }

    let base = build_environment(background, domain, seed)?;
    let mut cond = base.cond;

    let lo = domain.from_coords(location);
    let hi = domain.neighbor(lo, 0, 1).ok_or_else(|| RcmError::Geometry("core edge leaves the box".into()))?;
    let access = domain.neighbor(hi, 0, 1).ok_or_else(|| RcmError::Geometry("access vertex leaves the box".into()))?;

    // shield every edge incident to a core endpoint, then restore the core
    for &v in &[lo, hi] {
        for (axis, sign, w) in domain.neighbors(v) {
            let e = if sign > 0 {
                domain.edge_index(v, axis)
            } else {
                domain.edge_index(w, axis)
            }
            .expect("incident edge exists");
            cond[e] = strength;
        }
    }
    cond[domain.edge_index(lo, 0).expect("core edge")] = 1.0;

    // unit path from the access vertex to the origin of coordinates:
    // breadth-first shortest lattice path avoiding the core vertices
    // (deterministic through the canonical neighbor order)
    let origin = domain.center();
    let mut path = Vec::new();
    if lo != origin && hi != origin {
        if access == origin {
            path.push(access);
        } else {
            let n = domain.num_vertices();
            let mut prev = vec![usize::MAX; n];
            prev[access] = access;
            let mut queue = std::collections::VecDeque::from([access]);
            'bfs: while let Some(v) = queue.pop_front() {
                for (_, _, w) in domain.neighbors(v) {
                    if w == lo || w == hi || prev[w] != usize::MAX {
                        continue;
                    }
                    prev[w] = v;
                    if w == origin {
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
            if prev[origin] == usize::MAX {
                return Err(RcmError::Geometry(
                    "no access path from the trap to the origin".into(),
                ));
            }
            let mut cur = origin;
            let mut rev = vec![cur];
            while cur != access {
                cur = prev[cur];
                rev.push(cur);
            }
            rev.reverse(); // access first, origin last
            for pair in rev.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                for (axis, sign, w) in domain.neighbors(a) {
                    if w == b {
                        let e = if sign > 0 {
                            domain.edge_index(a, axis)
                        } else {
                            domain.edge_index(b, axis)
                        }
                        .expect("path edge exists");
                        // path vertices avoid the core, so this cannot
                        // clobber a shield edge
                        cond[e] = 1.0;
                        break;
                    }
                }
            }
            path = rev;
        }
    }

    let geometry = TrapGeometry {
        core_lo: lo,
        core_hi: hi,
        access,
        path,
        strength,
    };
    let env = Environment::from_edge_values(domain.clone(), cond)?;
    Ok((env, geometry))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus2(side: u32) -> LatticeDomain {
        LatticeDomain::torus(vec![side, side]).unwrap()
    }

    #[test]
    fn constant_on_torus_has_pi_2d() {
        let dom = torus2(4);
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        assert_eq!(env.edge_values().len(), 32);
        assert!(env.edge_values().iter().all(|&w| w == 1.0));
        for v in 0..env.num_vertices() {
            assert_eq!(env.pi(v), 4.0);
        }
    }

    #[test]
    fn percolation_degenerate_p() {
        let dom = torus2(4);
        let all0 = build_environment(&EnvironmentLaw::Percolation { p: 0.0 }, &dom, 1).unwrap();
        assert!(all0.edge_values().iter().all(|&w| w == 0.0));
        let all1 = build_environment(&EnvironmentLaw::Percolation { p: 1.0 }, &dom, 1).unwrap();
        assert!(all1.edge_values().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn line_constant_is_constant_along_lines() {
        let dom = LatticeDomain::torus(vec![6, 5]).unwrap();
        let law = EnvironmentLaw::LineConstant {
            distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
        };
        let env = build_environment(&law, &dom, 9).unwrap();
        // along direction 0, the conductance only depends on the transverse
        // coordinate: omega_{x-e_i,x} = omega_{x,x+e_i}
        for v in 0..env.num_vertices() {
            for axis in 0..2 {
                let fwd = env.conductance_signed(v, axis, 1);
                let bwd = env.conductance_signed(v, axis, -1);
                assert!((fwd - bwd).abs() < 1e-15, "line constancy violated at {v} axis {axis}");
            }
        }
    }

    #[test]
    fn corner_pi_on_free_box() {
        let dom = LatticeDomain::new(vec![2, 2], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        // unit box in d=2: every vertex is a corner with 2 incident edges
        for v in 0..4 {
            assert_eq!(env.pi(v), 2.0);
        }
    }

    #[test]
    fn transition_row_matches_hand_values() {
        // center vertex of a 3x3 free box with chosen conductances 2,1,1,0
        let dom = LatticeDomain::new(vec![3, 3], BoundaryMode::Free).unwrap();
        let mut cond = vec![0.0; dom.num_edges()];
        let c = dom.center();
        cond[dom.edge_index(c, 0).unwrap()] = 2.0; // +e0
        let below = dom.neighbor(c, 0, -1).unwrap();
        cond[dom.edge_index(below, 0).unwrap()] = 1.0; // -e0
        cond[dom.edge_index(c, 1).unwrap()] = 1.0; // +e1
        let env = Environment::from_edge_values(dom.clone(), cond).unwrap();
        assert_eq!(env.pi(c), 4.0);
        let row = env.transition_row(c).unwrap();
        let mut got = std::collections::HashMap::new();
        for (w, p) in row {
            got.insert(w, p);
        }
        assert_eq!(got[&dom.neighbor(c, 0, 1).unwrap()], 0.5);
        assert_eq!(got[&dom.neighbor(c, 0, -1).unwrap()], 0.25);
        assert_eq!(got[&dom.neighbor(c, 1, 1).unwrap()], 0.25);
        assert_eq!(got[&dom.neighbor(c, 1, -1).unwrap()], 0.0);
        let sum: f64 = got.values().sum();
        assert_eq!(sum, 1.0);
    }

    #[test]
    fn isolated_vertex_rejected_by_row() {
        let dom = torus2(3);
        let env = build_environment(&EnvironmentLaw::Constant { value: 0.0 }, &dom, 0).unwrap();
        assert!(matches!(
            env.transition_row(0),
            Err(RcmError::DegenerateVertex { .. })
        ));
    }

    #[test]
    fn detailed_balance_exact() {
        let dom = torus2(5);
        let law = EnvironmentLaw::Iid {
            distribution: DistributionSpec::Uniform { a: 0.0, b: 2.0 },
        };
        let env = build_environment(&law, &dom, 12).unwrap();
        for e in 0..env.edge_values().len() {
            let (v, w, _) = dom.edge_endpoints(e);
            if env.pi(v) > 0.0 && env.pi(w) > 0.0 {
                let pvw: f64 = env.edge_values()[e] / env.pi(v);
                let pwv: f64 = env.edge_values()[e] / env.pi(w);
                // pi(x) P(x,y) = omega_xy = pi(y) P(y,x); after the stored
                // division both sides agree to a couple of ulps
                let lhs = env.pi(v) * pvw;
                let rhs = env.pi(w) * pwv;
                let scale = env.edge_values()[e].max(1e-300);
                assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * scale);
            }
        }
    }

    #[test]
    fn serialization_roundtrip_and_size() {
        let dom = torus2(4);
        let env = build_environment(&EnvironmentLaw::Percolation { p: 0.5 }, &dom, 3).unwrap();
        let bytes = env.to_bytes();
        // header: 4 magic + 4 dim + 8 sides + 1 mode, then 32 edges x 8 bytes
        assert_eq!(bytes.len(), 17 + 256);
        let back = Environment::from_bytes(&bytes).unwrap();
        assert_eq!(back, env);
        let json = env.to_json();
        assert_eq!(Environment::from_json(&json).unwrap(), env);
    }

    #[test]
    fn wrong_magic_rejected() {
        let dom = torus2(3);
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let mut bytes = env.to_bytes();
        bytes[0] = b'X';
        assert!(matches!(Environment::from_bytes(&bytes), Err(RcmError::Format(_))));
        // truncation
        let short = &env.to_bytes()[..20];
        assert!(Environment::from_bytes(short).is_err());
    }

    #[test]
    fn build_is_pure_function_of_seed() {
        let dom = torus2(6);
        let law = EnvironmentLaw::Iid {
            distribution: DistributionSpec::LogUniform { a: 0.1, b: 10.0 },
        };
        let a = build_environment(&law, &dom, 77).unwrap();
        let b = build_environment(&law, &dom, 77).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        let c = build_environment(&law, &dom, 78).unwrap();
        assert_ne!(a.to_bytes(), c.to_bytes());
    }

    #[test]
    fn trap_shields_and_core() {
        let dom = LatticeDomain::new(vec![13, 13], BoundaryMode::Free).unwrap();
        let (env, geo) = build_trap_environment(
            &dom,
            0.1,
            &[2, 2],
            &EnvironmentLaw::Constant { value: 1.0 },
            0,
        )
        .unwrap();
        // core edge carries 1.0
        let e_core = dom.edge_index(geo.core_lo, 0).unwrap();
        assert_eq!(env.edge_values()[e_core], 1.0);
        // every other edge incident to the core endpoints carries 0.1
        for &v in &[geo.core_lo, geo.core_hi] {
            for (axis, sign, w) in dom.neighbors(v) {
                if (v == geo.core_lo && w == geo.core_hi) || (v == geo.core_hi && w == geo.core_lo)
                {
                    continue;
                }
                assert_eq!(env.conductance_signed(v, axis, sign), 0.1);
            }
        }
        // entering probability from the access vertex into the core
        let p_enter = env.conductance_signed(geo.access, 0, -1) / env.pi(geo.access);
        assert!((p_enter - 0.1 / env.pi(geo.access)).abs() < 1e-15);
        // path connects access vertex to the origin with unit edges
        assert_eq!(*geo.path.first().unwrap(), geo.access);
        assert_eq!(*geo.path.last().unwrap(), dom.center());
        for pair in geo.path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mut found = false;
            for (axis, sign, w) in dom.neighbors(a) {
                if w == b {
                    let c = env.conductance_signed(a, axis, sign);
                    assert!(c == 1.0 || a == geo.access, "path edge weight {c}");
                    found = true;
                }
            }
            assert!(found);
        }
    }

    #[test]
    fn trap_strength_one_is_unit_background() {
        let dom = LatticeDomain::new(vec![9, 9], BoundaryMode::Free).unwrap();
        let (env, _) = build_trap_environment(
            &dom,
            1.0,
            &[2, 2],
            &EnvironmentLaw::Constant { value: 1.0 },
            0,
        )
        .unwrap();
        assert!(env.edge_values().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn trap_rejects_bad_geometry() {
        let dom = LatticeDomain::new(vec![9, 9], BoundaryMode::Free).unwrap();
        assert!(build_trap_environment(&dom, 0.1, &[7, 2], &EnvironmentLaw::Constant { value: 1.0 }, 0).is_err());
        let line = LatticeDomain::new(vec![9], BoundaryMode::Free).unwrap();
        assert!(build_trap_environment(&line, 0.1, &[2], &EnvironmentLaw::Constant { value: 1.0 }, 0).is_err());
    }
}
