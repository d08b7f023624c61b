//! Forbidden-pattern avoidance on the integer grid. Grid cells are
//! linearized by a square spiral (rank 0 at the origin, ring k covering
//! ranks (2k-1)^2 ..= (2k+1)^2 - 1), so the first (2r+1)^2 variables are
//! exactly the centered square of radius r. Events are placements of a
//! forbidden rectangular pattern, trimmed by dropping the floor(delta*n)
//! cells of lowest spiral rank; the resulting per-variable counts obey
//! the same chain as the one-dimensional families. A cell of rank v can
//! only survive trimming when at least floor(delta*n) placement cells
//! rank below it, and the whole plane has just v such cells, so the
//! areas touching a variable are bounded exactly as lengths are on the
//! line.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use lll_core::rational::rat;
use lll_core::types::{Event, EventId, Value, VarId, VariableSpec};
use lll_core::Rational;

use infinite_engine::{
    run_stages, CertificateRule, EffectiveInstance, EventCertification, NeverFrozen,
};
use mt_finite::RandomTape;

use crate::error::AppError;
use crate::params::{
    derive_trim_chain, max_length_touching, trim_count, trimmed_size, TrimChain, WeightTable,
};

/// Cell at the given spiral rank: rank 0 is the origin, ring k >= 1 is
/// entered at (k, -k+1), walked up the right column, left along the top
/// row, down the left column, and right along the bottom row.
pub fn spiral_point(rank: u64) -> (i64, i64) {
    if rank == 0 {
        return (0, 0);
    }
    let k = (rank.isqrt() + 1) / 2;
    let side = 2 * k;
    let off = rank - (2 * k - 1) * (2 * k - 1);
    let (leg, pos) = (off / side, (off % side) as i64);
    let k = k as i64;
    match leg {
        0 => (k, -k + 1 + pos),
        1 => (k - 1 - pos, k),
        2 => (-k, k - 1 - pos),
        _ => (-k + 1 + pos, -k),
    }
}

/// Inverse of [`spiral_point`].
pub fn spiral_rank(x: i64, y: i64) -> u64 {
    let k = x.unsigned_abs().max(y.unsigned_abs());
    if k == 0 {
        return 0;
    }
    let base = (2 * k - 1) * (2 * k - 1);
    let side = 2 * k;
    let ki = k as i64;
    let off = if x == ki && y > -ki {
        (y + ki - 1) as u64
    } else if y == ki {
        side + (ki - 1 - x) as u64
    } else if x == -ki {
        2 * side + (ki - 1 - y) as u64
    } else {
        3 * side + (x + ki - 1) as u64
    };
    base + off
}

/// One-dimensional zigzag linearization of the integers: 0, -1, 1, -2,
/// 2, ... Used to spell signed coordinates in reports.
pub fn zigzag(rank: u64) -> i64 {
    if rank % 2 == 0 {
        (rank / 2) as i64
    } else {
        -(((rank + 1) / 2) as i64)
    }
}

/// Inverse of [`zigzag`].
pub fn zigzag_rank(value: i64) -> u64 {
    if value >= 0 {
        2 * value as u64
    } else {
        2 * value.unsigned_abs() - 1
    }
}

/// A rectangular 0/1 pattern: `rows` has `height` rows of `width` cells,
/// row 0 topmost.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pattern2D {
    pub height: u64,
    pub width: u64,
    pub rows: Vec<Vec<Value>>,
}

impl Pattern2D {
    pub fn new(rows: Vec<Vec<Value>>) -> Result<Self, AppError> {
        let height = rows.len() as u64;
        if height == 0 || rows[0].is_empty() {
            return Err(AppError::Invalid("pattern has no cells".into()));
        }
        let width = rows[0].len() as u64;
        for row in &rows {
            if row.len() as u64 != width {
                return Err(AppError::Invalid("pattern rows differ in width".into()));
            }
            if row.iter().any(|&c| c > 1) {
                return Err(AppError::Invalid("pattern has a non-binary cell".into()));
            }
        }
        Ok(Pattern2D {
            height,
            width,
            rows,
        })
    }

    pub fn area(&self) -> u64 {
        self.height * self.width
    }
}

/// A decidable set of rectangular 0/1 patterns with a per-area
/// enumerator, mirroring the word-set contract: sorted duplicate-free
/// enumeration agreeing with the decider, with at most 2^(alpha*n)
/// members of each queried area n.
pub trait PatternSet2D: Send + Sync {
    fn alpha(&self) -> Rational;

    /// Membership decider on rows of equal width.
    fn contains(&self, rows: &[Vec<Value>]) -> bool;

    /// All members of the given area, sorted by (height, width, rows).
    fn patterns_of_area(&self, area: u64) -> Vec<Pattern2D>;

    /// Largest member area, when bounded.
    fn max_area(&self) -> Option<u64> {
        None
    }

    fn describe(&self) -> String;
}

/// All-zero rectangles: one pattern per ordered divisor pair h*w = n,
/// so the count of area n is the divisor count d(n), far below 2^(n/8)
/// at every queried area.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroRects;

impl PatternSet2D for ZeroRects {
    fn alpha(&self) -> Rational {
        rat(1, 8)
    }

    fn contains(&self, rows: &[Vec<Value>]) -> bool {
        !rows.is_empty()
            && !rows[0].is_empty()
            && rows.iter().all(|row| row.iter().all(|&c| c == 0))
    }

    fn patterns_of_area(&self, area: u64) -> Vec<Pattern2D> {
        if area == 0 {
            return Vec::new();
        }
        (1..=area)
            .filter(|h| area % h == 0)
            .map(|h| {
                let w = area / h;
                Pattern2D {
                    height: h,
                    width: w,
                    rows: vec![vec![0; w as usize]; h as usize],
                }
            })
            .collect()
    }

    fn describe(&self) -> String {
        "zero-rects".into()
    }
}

/// An explicit finite pattern list, declared at alpha = 1/5 by default
/// like its one-dimensional counterpart.
#[derive(Debug, Clone)]
pub struct ExplicitPatterns {
    by_area: BTreeMap<u64, Vec<Pattern2D>>,
    alpha: Rational,
    max_area: u64,
}

impl ExplicitPatterns {
    pub fn new(patterns: Vec<Pattern2D>) -> Result<Self, AppError> {
        Self::with_alpha(patterns, rat(1, 5))
    }

    pub fn with_alpha(patterns: Vec<Pattern2D>, alpha: Rational) -> Result<Self, AppError> {
        if patterns.is_empty() {
            return Err(AppError::Invalid("explicit pattern set is empty".into()));
        }
        let mut by_area: BTreeMap<u64, Vec<Pattern2D>> = BTreeMap::new();
        for p in patterns {
            by_area.entry(p.area()).or_default().push(p);
        }
        let mut max_area = 0;
        for (area, list) in &mut by_area {
            list.sort();
            list.dedup();
            max_area = max_area.max(*area);
        }
        Ok(ExplicitPatterns {
            by_area,
            alpha,
            max_area,
        })
    }
}

impl PatternSet2D for ExplicitPatterns {
    fn alpha(&self) -> Rational {
        self.alpha.clone()
    }

    fn contains(&self, rows: &[Vec<Value>]) -> bool {
        let Ok(pattern) = Pattern2D::new(rows.to_vec()) else {
            return false;
        };
        self.by_area
            .get(&pattern.area())
            .is_some_and(|list| list.binary_search(&pattern).is_ok())
    }

    fn patterns_of_area(&self, area: u64) -> Vec<Pattern2D> {
        self.by_area.get(&area).cloned().unwrap_or_default()
    }

    fn max_area(&self) -> Option<u64> {
        Some(self.max_area)
    }

    fn describe(&self) -> String {
        let count: usize = self.by_area.values().map(Vec::len).sum();
        format!("explicit set ({count} patterns)")
    }
}

/// Parse a 2D forbidden-set description: either a single line naming a
/// built-in family (`zero-rects`) or blocks of the form `rect <h> <w>`
/// followed by h rows of w cells each. Blank lines and `#` comments are
/// ignored.
pub fn parse_pattern_set_2d(text: &str) -> Result<Arc<dyn PatternSet2D>, AppError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if lines.is_empty() {
        return Err(AppError::Invalid(
            "pattern-set description has no content".into(),
        ));
    }
    if lines.len() == 1 && !lines[0].starts_with("rect") {
        return builtin_pattern_set(lines[0]);
    }
    let mut patterns = Vec::new();
    let mut at = 0;
    while at < lines.len() {
        let header: Vec<&str> = lines[at].split_whitespace().collect();
        if header.len() != 3 || header[0] != "rect" {
            return Err(AppError::Invalid(format!(
                "expected `rect <h> <w>`, got {:?}",
                lines[at]
            )));
        }
        let h: usize = header[1]
            .parse()
            .map_err(|_| AppError::Invalid(format!("bad height {:?}", header[1])))?;
        let w: usize = header[2]
            .parse()
            .map_err(|_| AppError::Invalid(format!("bad width {:?}", header[2])))?;
        if h == 0 || w == 0 {
            return Err(AppError::Invalid(format!(
                "rect {h} {w} has no cells"
            )));
        }
        let mut rows = Vec::with_capacity(h);
        for i in 0..h {
            let row_line = lines.get(at + 1 + i).ok_or_else(|| {
                AppError::Invalid(format!("rect {h} {w} is missing row {i}"))
            })?;
            if row_line.len() != w || !row_line.chars().all(|c| c == '0' || c == '1') {
                return Err(AppError::Invalid(format!(
                    "rect {h} {w} row {i} must be {w} cells of 0/1, got {row_line:?}"
                )));
            }
            rows.push(row_line.chars().map(|c| (c == '1') as Value).collect());
        }
        patterns.push(Pattern2D::new(rows)?);
        at += 1 + h;
    }
    Ok(Arc::new(ExplicitPatterns::new(patterns)?))
}

/// Look up a built-in 2D family by name.
pub fn builtin_pattern_set(name: &str) -> Result<Arc<dyn PatternSet2D>, AppError> {
    match name {
        "zero-rects" => Ok(Arc::new(ZeroRects)),
        other => Err(AppError::Invalid(format!(
            "unknown built-in pattern set {other:?}; known: zero-rects"
        ))),
    }
}

// Grid event ids pack (height, width, pattern index, anchor) into one
// u64: height in bits 52..64, width in bits 40..52, the index within the
// (height, width) group in bits 32..40, and the anchor coordinates,
// offset by 2^15, in bits 16..32 and 0..16.
const DIM_CAP: u64 = 1 << 12;
const PIDX_CAP: u64 = 1 << 8;
const COORD_OFFSET: i64 = 1 << 15;

fn pack_grid_id(h: u64, w: u64, pidx: u64, x: i64, y: i64) -> EventId {
    assert!(h < DIM_CAP && w < DIM_CAP, "pattern side exceeds encoding");
    assert!(pidx < PIDX_CAP, "pattern index exceeds encoding");
    let xo = x + COORD_OFFSET;
    let yo = y + COORD_OFFSET;
    assert!(
        (0..(1 << 16)).contains(&xo) && (0..(1 << 16)).contains(&yo),
        "anchor ({x}, {y}) exceeds the coordinate encoding"
    );
    (h << 52) | (w << 40) | (pidx << 32) | ((xo as u64) << 16) | (yo as u64)
}

fn unpack_grid_id(id: EventId) -> (u64, u64, u64, i64, i64) {
    let h = id >> 52;
    let w = (id >> 40) & (DIM_CAP - 1);
    let pidx = (id >> 32) & (PIDX_CAP - 1);
    let x = ((id >> 16) & 0xFFFF) as i64 - COORD_OFFSET;
    let y = (id & 0xFFFF) as i64 - COORD_OFFSET;
    (h, w, pidx, x, y)
}

/// Patterns of one area, grouped by shape, in validated enumeration
/// order.
struct AreaBundle {
    shapes: BTreeMap<(u64, u64), Vec<Pattern2D>>,
    count: u64,
}

struct PatternCache {
    set: Arc<dyn PatternSet2D>,
    sparsity_num: u64,
    sparsity_den: u32,
    bundles: Mutex<BTreeMap<u64, Arc<AreaBundle>>>,
}

impl PatternCache {
    fn new(set: Arc<dyn PatternSet2D>) -> Self {
        let alpha = set.alpha();
        let sparsity_num = alpha
            .numer()
            .to_u64()
            .expect("sparsity numerator validated by the chain derivation");
        let sparsity_den = alpha
            .denom()
            .to_u64()
            .and_then(|d| u32::try_from(d).ok())
            .expect("sparsity denominator validated by the chain derivation");
        PatternCache {
            set,
            sparsity_num,
            sparsity_den,
            bundles: Mutex::new(BTreeMap::new()),
        }
    }

    fn validated(&self, area: u64) -> Result<Arc<AreaBundle>, AppError> {
        if let Some(found) = self
            .bundles
            .lock()
            .expect("pattern cache poisoned")
            .get(&area)
        {
            return Ok(found.clone());
        }
        let patterns = self.set.patterns_of_area(area);
        for p in &patterns {
            let shaped = p.rows.len() as u64 == p.height
                && p.rows.iter().all(|r| r.len() as u64 == p.width)
                && p.rows.iter().flatten().all(|&c| c <= 1)
                && p.area() == area;
            if !shaped || !self.set.contains(&p.rows) {
                return Err(AppError::EnumeratorDeciderMismatch { length: area });
            }
        }
        if !patterns.windows(2).all(|pair| pair[0] < pair[1]) {
            return Err(AppError::EnumeratorDeciderMismatch { length: area });
        }
        let count = patterns.len() as u64;
        let (a, b) = (self.sparsity_num, self.sparsity_den);
        let exponent = a.checked_mul(area).filter(|e| *e <= 1 << 26).ok_or_else(|| {
            AppError::Invalid(format!("sparsity exponent too large at area {area}"))
        })?;
        if BigUint::from(count).pow(b) > (BigUint::one() << exponent) {
            return Err(AppError::SparsityViolation {
                length: area,
                count,
            });
        }
        let mut shapes: BTreeMap<(u64, u64), Vec<Pattern2D>> = BTreeMap::new();
        for p in patterns {
            shapes.entry((p.height, p.width)).or_default().push(p);
        }
        for ((h, w), group) in &shapes {
            if group.len() as u64 > PIDX_CAP {
                return Err(AppError::Invalid(format!(
                    "{} patterns of shape {h}x{w} exceed the event-id encoding",
                    group.len()
                )));
            }
        }
        let bundle = Arc::new(AreaBundle { shapes, count });
        self.bundles
            .lock()
            .expect("pattern cache poisoned")
            .insert(area, bundle.clone());
        Ok(bundle)
    }

    fn bundle(&self, area: u64) -> Arc<AreaBundle> {
        self.validated(area)
            .unwrap_or_else(|e| panic!("pattern-set contract violated: {e}"))
    }
}

/// Effective instance over spiral-linearized grid cells whose events are
/// trimmed placements of forbidden patterns.
pub struct GridFamily {
    cache: Arc<PatternCache>,
    chain: TrimChain,
    weights: WeightTable,
}

impl GridFamily {
    /// Smallest pattern area that contributes events.
    pub fn threshold(&self) -> u64 {
        self.chain.threshold
    }

    pub fn chain(&self) -> &TrimChain {
        &self.chain
    }

    fn area_hi(&self, var: VarId) -> u64 {
        let by_trim = max_length_touching(var, &self.chain.delta);
        self.cache
            .set
            .max_area()
            .map_or(by_trim, |l| by_trim.min(l))
    }

    /// Largest spiral rank in the placement of an h x w pattern anchored
    /// (top-left) at (x, y), where pattern cell (i, j) sits at
    /// (x + j, y - i): ranks grow ring by ring and
    /// the outermost touched ring meets the rectangle border, so the
    /// border maximum is the placement maximum.
    fn placement_max_rank(h: u64, w: u64, x: i64, y: i64) -> u64 {
        let (h, w) = (h as i64, w as i64);
        let mut max = 0;
        for j in 0..w {
            max = max.max(spiral_rank(x + j, y));
            max = max.max(spiral_rank(x + j, y - h + 1));
        }
        for i in 0..h {
            max = max.max(spiral_rank(x, y - i));
            max = max.max(spiral_rank(x + w - 1, y - i));
        }
        max
    }

    /// Trimmed variable set and kept pattern cells of one placement:
    /// drops the floor(delta*n) lowest-ranked cells, returning the rest
    /// as (rank, value) sorted by rank.
    fn trimmed_cells(&self, pattern: &Pattern2D, x: i64, y: i64) -> Vec<(u64, Value)> {
        let mut cells: Vec<(u64, Value)> = Vec::with_capacity(pattern.area() as usize);
        for i in 0..pattern.height as i64 {
            for j in 0..pattern.width as i64 {
                cells.push((
                    spiral_rank(x + j, y - i),
                    pattern.rows[i as usize][j as usize],
                ));
            }
        }
        cells.sort_unstable_by_key(|&(rank, _)| rank);
        cells.drain(..trim_count(pattern.area(), &self.chain.delta) as usize);
        cells
    }
}

/// Build the trimmed placement family for a 2D forbidden set at slack
/// `eps`, validating every contributing area up front when the set is
/// bounded.
pub fn grid_cnf(set: Arc<dyn PatternSet2D>, eps: &Rational) -> Result<GridFamily, AppError> {
    let chain = derive_trim_chain(&set.alpha(), eps)?;
    let cache = Arc::new(PatternCache::new(set.clone()));
    if let Some(max_area) = set.max_area() {
        for n in chain.threshold..=max_area {
            cache.validated(n)?;
        }
    }
    let weights = WeightTable::new(chain.beta_trim.clone());
    Ok(GridFamily {
        cache,
        chain,
        weights,
    })
}

impl EffectiveInstance for GridFamily {
    fn variable_spec(&self, var: VarId) -> VariableSpec {
        VariableSpec::uniform_bit(var)
    }

    fn events_of_variable(&self, var: VarId) -> Vec<EventId> {
        let (cx, cy) = spiral_point(var);
        let mut out = Vec::new();
        for area in self.chain.threshold..=self.area_hi(var) {
            let t = trim_count(area, &self.chain.delta);
            if t > var {
                // Fewer than t cells of the whole plane rank below var,
                // so var is always among the trimmed cells.
                continue;
            }
            let bundle = self.cache.bundle(area);
            for ((h, w), group) in &bundle.shapes {
                for (pidx, pattern) in group.iter().enumerate() {
                    for x in (cx - *w as i64 + 1)..=cx {
                        for y in cy..(cy + *h as i64) {
                            let kept = self.trimmed_cells(pattern, x, y);
                            if kept.binary_search_by_key(&var, |&(r, _)| r).is_ok() {
                                out.push(pack_grid_id(*h, *w, pidx as u64, x, y));
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn event_def(&self, id: EventId) -> Event {
        let (h, w, pidx, x, y) = unpack_grid_id(id);
        let bundle = self.cache.bundle(h * w);
        let pattern = bundle
            .shapes
            .get(&(h, w))
            .and_then(|group| group.get(pidx as usize))
            .unwrap_or_else(|| panic!("event id {id} names no pattern of shape {h}x{w}"));
        let kept = self.trimmed_cells(pattern, x, y);
        let vars: Vec<VarId> = kept.iter().map(|&(rank, _)| rank).collect();
        let tuple: Vec<Value> = kept.iter().map(|&(_, value)| value).collect();
        Event::new(id, vars, vec![tuple]).expect("a trimmed placement is a valid event")
    }

    fn weight(&self, id: EventId) -> Rational {
        let (h, w, ..) = unpack_grid_id(id);
        self.weights.weight(trimmed_size(h * w, &self.chain.delta))
    }

    fn epsilon(&self) -> Rational {
        self.chain.eps.clone()
    }

    fn events_upto(&self, max_var: VarId) -> Vec<EventId> {
        // Cells of rank <= max_var lie within Chebyshev radius K of the
        // origin, so candidate placements live in that square; the exact
        // border maximum then filters.
        let k = if max_var == 0 {
            0
        } else {
            ((max_var.isqrt() + 1) / 2) as i64
        };
        let side = 2 * k + 1;
        let mut keyed: Vec<(VarId, EventId)> = Vec::new();
        let area_cap = self.area_hi(max_var).min((side * side) as u64);
        for area in self.chain.threshold..=area_cap {
            let bundle = self.cache.bundle(area);
            for ((h, w), group) in &bundle.shapes {
                let (hi, wi) = (*h as i64, *w as i64);
                if hi > side || wi > side {
                    continue;
                }
                for pidx in 0..group.len() as u64 {
                    for x in -k..=(k - wi + 1) {
                        for y in (-k + hi - 1)..=k {
                            let max_rank = Self::placement_max_rank(*h, *w, x, y);
                            if max_rank <= max_var {
                                keyed.push((max_rank, pack_grid_id(*h, *w, pidx, x, y)));
                            }
                        }
                    }
                }
            }
        }
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, id)| id).collect()
    }

    fn var_weight_bound(&self, _var: VarId) -> Rational {
        self.chain.var_weight_ub()
    }

    fn prefix_weight_bound(&self, max_var: VarId) -> Rational {
        // Count placements inside the bounding square instead of exactly:
        // an over-count is still a sound upper bound.
        let k = if max_var == 0 {
            0
        } else {
            (max_var.isqrt() + 1) / 2
        };
        let side = 2 * k + 1;
        let mut total = Rational::zero();
        let area_cap = self.area_hi(max_var).min(side * side);
        for area in self.chain.threshold..=area_cap {
            let bundle = self.cache.bundle(area);
            if bundle.count == 0 {
                continue;
            }
            let weight = self.weights.weight(trimmed_size(area, &self.chain.delta));
            let mut placements = 0u64;
            for ((h, w), group) in &bundle.shapes {
                if *h > side || *w > side {
                    continue;
                }
                placements += group.len() as u64 * (side - h + 1) * (side - w + 1);
            }
            total += rat(2, 1) * Rational::from_integer(placements.into()) * weight;
        }
        total
    }

    fn certify_event(&self, _id: EventId) -> EventCertification {
        EventCertification::FamilyProof
    }

    /// No cheap sound freeze rule is implemented for the grid (trimmed
    /// cells depend on the placement), so certified extraction reports
    /// failure instead of guessing; block emission goes through staged
    /// runs directly.
    fn certificate(&self) -> Option<&dyn CertificateRule> {
        Some(&NeverFrozen)
    }
}

/// A (2r+1) x (2r+1) block emitted by the 2D avoidance pipeline, row 0
/// topmost (y = r), column 0 leftmost (x = -r).
#[derive(Debug, Clone)]
pub struct AvoidOutcome2D {
    pub block: Vec<Vec<Value>>,
    /// Forbidden patterns of area below this may still occur; larger
    /// areas are excluded.
    pub threshold: u64,
    pub radius: u64,
}

/// Fill the centered square of radius `radius` by staging the grid
/// family through its first (2r+1)^2 variables at slack 1/10, then
/// re-check every contained rectangle of qualifying area against the
/// set's decider.
pub fn avoid_patterns_2d(
    set: Arc<dyn PatternSet2D>,
    radius: u64,
    seed: u64,
) -> Result<AvoidOutcome2D, AppError> {
    if radius > 16_000 {
        return Err(AppError::Invalid(format!(
            "radius {radius} exceeds the coordinate encoding"
        )));
    }
    let family = grid_cnf(set.clone(), &rat(1, 10))?;
    let upto = (2 * radius + 1) * (2 * radius + 1) - 1;
    let (runner, _snapshots) = run_stages(&family, RandomTape::new(seed), upto)?;
    let values = runner.values();
    let side = (2 * radius + 1) as usize;
    let r = radius as i64;
    let block: Vec<Vec<Value>> = (0..side)
        .map(|i| {
            (0..side)
                .map(|j| values[spiral_rank(j as i64 - r, r - i as i64) as usize])
                .collect()
        })
        .collect();
    let lo = family.threshold();
    for i in 0..side {
        for j in 0..side {
            for h in 1..=(side - i) {
                for w in 1..=(side - j) {
                    let area = (h * w) as u64;
                    if area < lo || set.max_area().is_some_and(|m| area > m) {
                        continue;
                    }
                    let rows: Vec<Vec<Value>> = (0..h)
                        .map(|di| block[i + di][j..j + w].to_vec())
                        .collect();
                    if set.contains(&rows) {
                        return Err(AppError::Invalid(format!(
                            "internal error: emitted block contains a forbidden {h}x{w} rectangle at ({i}, {j})"
                        )));
                    }
                }
            }
        }
    }
    Ok(AvoidOutcome2D {
        block,
        threshold: lo,
        radius,
    })
}
