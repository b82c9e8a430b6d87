//! Exact arithmetic in G = Z^2 x|_T Z and a breadth-first word-metric oracle.
//!
//! T = [[0,-1],[1,2k+1]] acts by t x t^-1 = T x. In the basis (a, b) this is
//! a^t = b and b^t = a^-1 b^(2k+1).

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default cap on the number of visited elements in `bfs_ball`.
pub const DEFAULT_VISIT_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupParams {
    k: u32,
}

impl GroupParams {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidK(k));
        }
        Ok(GroupParams { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Trace d = 2k + 1.
    pub fn d(&self) -> i64 {
        2 * self.k as i64 + 1
    }

    /// T as a row-major 2x2 matrix.
    pub fn matrix(&self) -> [[i64; 2]; 2] {
        [[0, -1], [1, self.d()]]
    }

    pub fn inverse_matrix(&self) -> [[i64; 2]; 2] {
        [[self.d(), 1], [-1, 0]]
    }
}

/// Pair (x, t^n) with x in Z^2 written in the basis (a, b).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GroupElement {
    pub x: [BigInt; 2],
    pub n: BigInt,
}

impl GroupElement {
    pub fn new(x0: impl Into<BigInt>, x1: impl Into<BigInt>, n: impl Into<BigInt>) -> Self {
        GroupElement { x: [x0.into(), x1.into()], n: n.into() }
    }

    pub fn identity() -> Self {
        GroupElement::new(0, 0, 0)
    }

    pub fn is_identity(&self) -> bool {
        self.x[0].is_zero() && self.x[1].is_zero() && self.n.is_zero()
    }

    /// Generators in BFS order: a, a^-1, b, b^-1, t, t^-1.
    pub fn generators() -> [GroupElement; 6] {
        [
            GroupElement::new(1, 0, 0),
            GroupElement::new(-1, 0, 0),
            GroupElement::new(0, 1, 0),
            GroupElement::new(0, -1, 0),
            GroupElement::new(0, 0, 1),
            GroupElement::new(0, 0, -1),
        ]
    }

    fn key(&self) -> Option<Key> {
        Some([self.x[0].to_i64()?, self.x[1].to_i64()?, self.n.to_i64()?])
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    /// Lexicographic on (n, x0, x1).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.n, &self.x[0], &self.x[1]).cmp(&(&other.n, &other.x[0], &other.x[1]))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}, {}), t^{})", self.x[0], self.x[1], self.n)
    }
}

fn apply(m: &[[i64; 2]; 2], x: &[BigInt; 2]) -> [BigInt; 2] {
    [
        &x[0] * m[0][0] + &x[1] * m[0][1],
        &x[0] * m[1][0] + &x[1] * m[1][1],
    ]
}

/// T^m x by iterated application of T or T^-1.
pub fn t_action(params: &GroupParams, x: &[BigInt; 2], m: i64) -> [BigInt; 2] {
    let mat = if m >= 0 { params.matrix() } else { params.inverse_matrix() };
    let mut y = x.clone();
    for _ in 0..m.unsigned_abs() {
        y = apply(&mat, &y);
    }
    y
}

fn exponent(n: &BigInt) -> i64 {
    n.to_i64().expect("t-exponent exceeds i64; T^n would not fit in memory anyway")
}

/// (x, t^n)(y, t^m) = (x + T^n y, t^(n+m)).
pub fn multiply(params: &GroupParams, g: &GroupElement, h: &GroupElement) -> GroupElement {
    let ty = t_action(params, &h.x, exponent(&g.n));
    GroupElement { x: [&g.x[0] + &ty[0], &g.x[1] + &ty[1]], n: &g.n + &h.n }
}

/// (x, t^n)^-1 = (-T^-n x, t^-n).
pub fn invert(params: &GroupParams, g: &GroupElement) -> GroupElement {
    let y = t_action(params, &g.x, -exponent(&g.n));
    GroupElement { x: [-&y[0], -&y[1]], n: -&g.n }
}

type Key = [i64; 3];

/// Generator index into `GroupElement::generators()` order.
pub type GenIndex = u8;

#[derive(Clone, Copy, Debug)]
struct Visit {
    dist: u16,
    /// Generator used on the last step of a geodesic; `u8::MAX` for the identity.
    last: GenIndex,
}

/// How `bfs_ball` expands each frontier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Data-parallel frontier expansion; falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// The ball of radius `radius` with exact word lengths.
#[derive(Clone, Debug)]
pub struct BallTable {
    pub params: GroupParams,
    pub radius: u32,
    pub sphere_sizes: Vec<u64>,
    distances: HashMap<Key, Visit>,
}

#[derive(Serialize)]
struct BallSummary<'a> {
    k: u32,
    radius: u32,
    sphere_sizes: &'a [u64],
    ball_sizes: Vec<u64>,
}

impl BallTable {
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn ball_sizes(&self) -> Vec<u64> {
        self.sphere_sizes
            .iter()
            .scan(0u64, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }

    /// Word length of `g`, if `g` lies in the ball.
    pub fn distance(&self, g: &GroupElement) -> Option<u32> {
        self.distances.get(&g.key()?).map(|v| v.dist as u32)
    }

    /// All elements with their word lengths, sorted by (n, x0, x1).
    pub fn elements(&self) -> Vec<(GroupElement, u32)> {
        let mut keys: Vec<_> = self.distances.iter().map(|(k, v)| (*k, v.dist as u32)).collect();
        keys.sort_by_key(|(k, _)| (k[2], k[0], k[1]));
        keys.into_iter().map(|(k, d)| (GroupElement::new(k[0], k[1], k[2]), d)).collect()
    }

    /// A geodesic word for `g` as generator indices (a, a^-1, b, b^-1, t, t^-1 = 0..5).
    pub fn geodesic(&self, g: &GroupElement) -> Option<Vec<GenIndex>> {
        let steps = StepTable::new(&self.params, self.radius as i64 + 1).ok()?;
        let mut key = g.key()?;
        let mut word = Vec::new();
        loop {
            let v = self.distances.get(&key)?;
            if v.last == u8::MAX {
                break;
            }
            word.push(v.last);
            key = steps.step(key, inverse_gen(v.last))?;
        }
        word.reverse();
        Some(word)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BallSummary {
            k: self.params.k(),
            radius: self.radius,
            sphere_sizes: &self.sphere_sizes,
            ball_sizes: self.ball_sizes(),
        })
        .expect("ball summary serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["radius", "sphere", "ball"]).expect("in-memory write");
        for (r, (s, b)) in self.sphere_sizes.iter().zip(self.ball_sizes()).enumerate() {
            w.write_record([r.to_string(), s.to_string(), b.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

pub fn inverse_gen(g: GenIndex) -> GenIndex {
    g ^ 1
}

/// Precomputed T^n a and T^n b for |n| <= span, in i64 with overflow checks.
struct StepTable {
    span: i64,
    cols: Vec<[[i64; 2]; 2]>,
}

impl StepTable {
    fn new(params: &GroupParams, span: i64) -> Result<Self> {
        let mut cols = vec![[[0i64; 2]; 2]; (2 * span + 1) as usize];
        for n in -span..=span {
            let ta = t_action(params, &[BigInt::from(1), BigInt::zero()], n);
            let tb = t_action(params, &[BigInt::zero(), BigInt::from(1)], n);
            let conv = |v: &[BigInt; 2]| -> Result<[i64; 2]> {
                match (v[0].to_i64(), v[1].to_i64()) {
                    (Some(p), Some(q)) if p.abs() < i64::MAX / 64 && q.abs() < i64::MAX / 64 => Ok([p, q]),
                    _ => Err(Error::Overflow("T^n entries exceed the BFS key range")),
                }
            };
            cols[(n + span) as usize] = [conv(&ta)?, conv(&tb)?];
        }
        Ok(StepTable { span, cols })
    }

    fn step(&self, key: Key, gen: GenIndex) -> Option<Key> {
        let [x0, x1, n] = key;
        match gen {
            4 => return Some([x0, x1, n + 1]),
            5 => return Some([x0, x1, n - 1]),
            _ => {}
        }
        if n.abs() > self.span {
            return None;
        }
        let col = self.cols[(n + self.span) as usize][(gen / 2) as usize];
        let sign = if gen.is_multiple_of(2) { 1 } else { -1 };
        Some([x0.checked_add(sign * col[0])?, x1.checked_add(sign * col[1])?, n])
    }
}

fn expand(steps: &StepTable, frontier: &[Key]) -> Vec<(Key, GenIndex)> {
    frontier
        .iter()
        .flat_map(|&key| (0..6u8).filter_map(move |g| steps.step(key, g).map(|k| (k, g))))
        .collect()
}

#[cfg(feature = "parallel")]
fn expand_parallel(steps: &StepTable, frontier: &[Key]) -> Vec<(Key, GenIndex)> {
    use rayon::prelude::*;
    frontier
        .par_chunks(4096)
        .flat_map_iter(|chunk| expand(steps, chunk))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn expand_parallel(steps: &StepTable, frontier: &[Key]) -> Vec<(Key, GenIndex)> {
    expand(steps, frontier)
}

/// Ball of the given radius with the default visit cap and executor.
pub fn bfs_ball(params: &GroupParams, radius: u32) -> Result<BallTable> {
    bfs_ball_with(params, radius, DEFAULT_VISIT_CAP, Exec::default())
}

/// Breadth-first search from the identity by right multiplication with generators.
///
/// The result does not depend on `exec`: candidates are merged in generator order
/// over a sorted frontier.
pub fn bfs_ball_with(params: &GroupParams, radius: u32, cap: usize, exec: Exec) -> Result<BallTable> {
    let steps = StepTable::new(params, radius as i64 + 1)?;
    let mut distances: HashMap<Key, Visit> = HashMap::new();
    distances.insert([0, 0, 0], Visit { dist: 0, last: u8::MAX });
    let mut frontier = vec![[0i64, 0, 0]];
    let mut sphere_sizes = vec![1u64];
    for r in 1..=radius {
        let candidates = match exec {
            Exec::Sequential => expand(&steps, &frontier),
            Exec::Parallel => expand_parallel(&steps, &frontier),
        };
        let mut next = Vec::new();
        for (key, g) in candidates {
            if let std::collections::hash_map::Entry::Vacant(e) = distances.entry(key) {
                e.insert(Visit { dist: r as u16, last: g });
                next.push(key);
            }
        }
        if distances.len() > cap {
            return Err(Error::Budget { what: "bfs visited set", limit: cap });
        }
        next.sort_unstable();
        sphere_sizes.push(next.len() as u64);
        frontier = next;
    }
    Ok(BallTable { params: *params, radius, sphere_sizes, distances })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> GroupParams {
        GroupParams::new(2).unwrap()
    }

    #[test]
    fn t_action_examples() {
        let p = p2();
        let a = [BigInt::from(1), BigInt::from(0)];
        let b = [BigInt::from(0), BigInt::from(1)];
        assert_eq!(t_action(&p, &a, 1), b);
        assert_eq!(t_action(&p, &b, 1), [BigInt::from(-1), BigInt::from(5)]);
        assert_eq!(t_action(&p, &b, 0), b);
        assert_eq!(t_action(&p, &t_action(&p, &b, 7), -7), b);
    }

    #[test]
    fn multiply_examples() {
        let p = p2();
        let t = GroupElement::new(0, 0, 1);
        let ti = GroupElement::new(0, 0, -1);
        let a = GroupElement::new(1, 0, 0);
        let conj = multiply(&p, &multiply(&p, &t, &a), &ti);
        assert_eq!(conj, GroupElement::new(0, 1, 0));
        assert_eq!(multiply(&p, &GroupElement::identity(), &a), a);
        let b = GroupElement::new(0, 1, 0);
        assert_eq!(multiply(&p, &a, &b), GroupElement::new(1, 1, 0));
    }

    #[test]
    fn invert_examples() {
        let p = p2();
        assert_eq!(invert(&p, &GroupElement::new(0, 0, 1)), GroupElement::new(0, 0, -1));
        assert_eq!(invert(&p, &GroupElement::new(1, 0, 0)), GroupElement::new(-1, 0, 0));
        let g = GroupElement::new(0, 1, 1);
        let gi = invert(&p, &g);
        assert_eq!(gi, GroupElement::new(-1, 0, -1));
        assert!(multiply(&p, &g, &gi).is_identity());
    }

    #[test]
    fn small_balls() {
        let p = p2();
        assert_eq!(bfs_ball(&p, 0).unwrap().sphere_sizes, vec![1]);
        assert_eq!(bfs_ball(&p, 1).unwrap().sphere_sizes, vec![1, 6]);
        assert_eq!(bfs_ball(&p, 2).unwrap().sphere_sizes, vec![1, 6, 22]);
    }

    #[test]
    fn cap_is_enforced() {
        let err = bfs_ball_with(&p2(), 6, 100, Exec::Sequential).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn executors_agree() {
        let p = GroupParams::new(3).unwrap();
        let s = bfs_ball_with(&p, 7, DEFAULT_VISIT_CAP, Exec::Sequential).unwrap();
        let q = bfs_ball_with(&p, 7, DEFAULT_VISIT_CAP, Exec::Parallel).unwrap();
        assert_eq!(s.sphere_sizes, q.sphere_sizes);
        assert_eq!(s.elements(), q.elements());
    }

    #[test]
    fn geodesics_evaluate_back() {
        let p = p2();
        let ball = bfs_ball(&p, 5).unwrap();
        let gens = GroupElement::generators();
        for (g, d) in ball.elements() {
            let w = ball.geodesic(&g).unwrap();
            assert_eq!(w.len() as u32, d);
            let h = w.iter().fold(GroupElement::identity(), |acc, &i| multiply(&p, &acc, &gens[i as usize]));
            assert_eq!(h, g);
        }
    }

    #[test]
    fn serialization() {
        let ball = bfs_ball(&p2(), 2).unwrap();
        assert_eq!(ball.to_json(), r#"{"k":2,"radius":2,"sphere_sizes":[1,6,22],"ball_sizes":[1,7,29]}"#);
        assert_eq!(ball.to_csv(), "radius,sphere,ball\n0,1,1\n1,6,7\n2,22,29\n");
    }
}
