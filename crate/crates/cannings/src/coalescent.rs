//! Spatial lambda-coalescents with non-local coalescence.
//!
//! Families (= ancestral lineages) carry site labels and evolve by
//! * migration of each family along the hierarchical random walk,
//! * local coalescence at a site: a fixed `i`-subset of the `b` co-located
//!   families merges at rate `lambda_{b,i}`, plus `2d` per pair from the
//!   Kingman atom,
//! * block events at level `k >= 1`: a radius-`k` ball fires at rate
//!   `N^-k lambda*_k`; a mark fraction `r` is drawn from the normalised
//!   intensity, marked families merge, and every family in the ball is then
//!   relocated uniformly (reshuffling applies even when nothing coalesces).
//!
//! Local events use the subset-rate channels directly, which keeps all rates
//! finite for dust-free level-0 measures; block levels require a finite
//! total intensity.
//!
//! The immigration-emigration variant lives on `{0, *}`: families at the
//! origin coalesce locally and emigrate to the frozen cemetery state at rate
//! `c`. Its absorption law is also solved exactly for small samples.

use crate::hiergeo::{HierGeometry, MigrationSpec};
use crate::lambda::LambdaMeasure;
use crate::stats::{Estimate, RunningStats};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;
use std::collections::HashMap;

/// Exponential waiting time with the given total rate.
fn exp_wait(rate: f64, rng: &mut impl Rng) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Geographic space of the coalescent.
#[derive(Debug, Clone)]
pub enum CoalescentSpace {
    /// Truncated hierarchical group (order `N`, `K` levels). `K = 1` is the
    /// mean-field island model.
    Hierarchical {
        geom: HierGeometry,
        mig: MigrationSpec,
    },
    /// `{0, *}`: emigration from the origin to a frozen cemetery at rate `c`.
    ImmigrationEmigration { c: f64 },
}

/// Label value of the cemetery state on `{0, *}`.
pub const CEMETERY: u64 = u64::MAX;

/// A coalescent state: disjoint member sets covering `0..n`, each with a
/// site label, ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledPartition {
    families: Vec<(Vec<usize>, u64)>,
    n: usize,
}

impl LabelledPartition {
    pub fn new(mut families: Vec<(Vec<usize>, u64)>) -> Result<Self> {
        let mut seen: Vec<bool> = Vec::new();
        let mut count = 0usize;
        for (members, _) in &mut families {
            if members.is_empty() {
                return Err(Error::InvalidPartition("empty member set".into()));
            }
            members.sort_unstable();
            for &m in members.iter() {
                if m >= seen.len() {
                    seen.resize(m + 1, false);
                }
                if seen[m] {
                    return Err(Error::InvalidPartition(format!("member {m} appears twice")));
                }
                seen[m] = true;
                count += 1;
            }
        }
        if seen.len() != count {
            return Err(Error::InvalidPartition(
                "member sets must cover 0..n without gaps".into(),
            ));
        }
        let mut p = LabelledPartition { families, n: count };
        p.normalise();
        Ok(p)
    }

    /// The all-singletons state with the given labels.
    pub fn singletons(labels: &[u64]) -> Self {
        let families = labels
            .iter()
            .enumerate()
            .map(|(i, &g)| (vec![i], g))
            .collect();
        LabelledPartition {
            families,
            n: labels.len(),
        }
    }

    fn normalise(&mut self) {
        self.families.sort_by_key(|(members, _)| members[0]);
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[(Vec<usize>, u64)] {
        &self.families
    }

    pub fn labels(&self) -> impl Iterator<Item = u64> + '_ {
        self.families.iter().map(|(_, g)| *g)
    }

    /// Family index containing a given member.
    pub fn family_of(&self, member: usize) -> Option<usize> {
        self.families
            .iter()
            .position(|(m, _)| m.binary_search(&member).is_ok())
    }

    /// Restriction to the first `n` members (projectivity).
    pub fn restrict(&self, n: usize) -> Self {
        let families: Vec<(Vec<usize>, u64)> = self
            .families
            .iter()
            .filter_map(|(members, g)| {
                let kept: Vec<usize> = members.iter().copied().filter(|&m| m < n).collect();
                (!kept.is_empty()).then_some((kept, *g))
            })
            .collect();
        let mut p = LabelledPartition { families, n };
        p.normalise();
        p
    }

    /// Multiset of family sizes, sorted descending.
    pub fn size_multiset(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.families.iter().map(|(m, _)| m.len()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// Merge the families indexed by `merge` into one family labelled `g`.
/// An empty index set is the identity.
pub fn coalesce_blocks(
    partition: &LabelledPartition,
    merge: &[usize],
    g: u64,
) -> Result<LabelledPartition> {
    if merge.is_empty() {
        return Ok(partition.clone());
    }
    let mut idx: Vec<usize> = merge.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if *idx.last().unwrap() >= partition.families.len() {
        return Err(Error::InvalidPartition(format!(
            "family index {} out of range",
            idx.last().unwrap()
        )));
    }
    let mut merged: Vec<usize> = Vec::new();
    let mut rest: Vec<(Vec<usize>, u64)> = Vec::new();
    for (i, fam) in partition.families.iter().enumerate() {
        if idx.binary_search(&i).is_ok() {
            merged.extend_from_slice(&fam.0);
        } else {
            rest.push(fam.clone());
        }
    }
    merged.sort_unstable();
    rest.push((merged, g));
    let mut p = LabelledPartition {
        families: rest,
        n: partition.n,
    };
    p.normalise();
    Ok(p)
}

/// Relabel every family whose label lies in the radius-`k` ball around
/// `center`; `targets` supplies one new label per such family, in the order
/// they appear in the partition.
pub fn reshuffle_block(
    partition: &LabelledPartition,
    geom: &HierGeometry,
    center: u64,
    k: u32,
    targets: &[u64],
) -> Result<LabelledPartition> {
    let mut out = partition.clone();
    let mut t = 0usize;
    for (_, g) in out.families.iter_mut() {
        if geom.distance_idx(*g, center) <= k {
            let new = *targets.get(t).ok_or_else(|| {
                Error::parameter("one reshuffle target per family in the block is required")
            })?;
            if geom.distance_idx(new, center) > k {
                return Err(Error::parameter(format!(
                    "reshuffle target {new} lies outside the block"
                )));
            }
            *g = new;
            t += 1;
        }
    }
    Ok(out)
}

/// Configuration of a coalescent run.
#[derive(Debug, Clone)]
pub struct CoalescentConfig {
    pub space: CoalescentSpace,
    /// Per-level measures `Lambda_0, ..`; levels `>= 1` need a finite total
    /// intensity. The immigration-emigration space uses only `Lambda_0`.
    pub lambdas: Vec<LambdaMeasure>,
    /// Accumulate the pair hazard (meaningful for samples of size 2).
    pub track_hazard: bool,
}

impl CoalescentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::parameter("at least the level-0 measure is required"));
        }
        for (k, lam) in self.lambdas.iter().enumerate().skip(1) {
            if !lam.lambda_star().is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "level-{k} measure has infinite total intensity; block events need \
                     a finite lambda*"
                )));
            }
        }
        if let CoalescentSpace::Hierarchical { geom, .. } = &self.space {
            let levels = geom.levels()? as usize;
            if self.lambdas.len() > levels + 1 {
                return Err(Error::parameter(format!(
                    "{} measures supplied but the geometry has {} levels",
                    self.lambdas.len(),
                    levels
                )));
            }
        }
        Ok(())
    }
}

/// One transition of the coalescent.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    Migration {
        family: usize,
        from: u64,
        to: u64,
    },
    Level0Coalescence {
        site: u64,
        merged: usize,
    },
    KingmanPair {
        site: u64,
    },
    BlockEvent {
        level: u32,
        block: u64,
        r: f64,
        marks: usize,
        coalesced: bool,
        reshuffle_targets: Vec<u64>,
    },
}

impl EventKind {
    /// Hierarchical level touched by the event (0 for local ones).
    pub fn level(&self) -> u32 {
        match self {
            EventKind::BlockEvent { level, .. } => *level,
            _ => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Migration { .. } => "migration",
            EventKind::Level0Coalescence { .. } => "level0-coalescence",
            EventKind::KingmanPair { .. } => "kingman-pair",
            EventKind::BlockEvent { .. } => "block-event",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
    pub block_count: usize,
}

/// Result of one coalescent run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub events: Vec<EventRecord>,
    pub final_partition: LabelledPartition,
    /// Accumulated pair hazard, when tracking was requested.
    pub hazard: f64,
}

/// Precomputed local coalescence channels for up to `n` co-located families.
struct LocalRates {
    /// `rate[b][i]` = `lambda_{b,i} * C(b,i)` for `2 <= i <= b`.
    subset_total: Vec<Vec<f64>>,
    /// Row sums of `subset_total`.
    total: Vec<f64>,
    kingman_pair: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

impl LocalRates {
    fn build(measure: &LambdaMeasure, n: usize) -> Result<Self> {
        let mut subset_total = vec![Vec::new(); n + 1];
        let mut total = vec![0.0; n + 1];
        for b in 2..=n {
            let mut row = vec![0.0; b + 1];
            for i in 2..=b {
                row[i] = measure.coalescence_rate(b, i)? * binomial(b, i);
            }
            total[b] = row.iter().sum();
            subset_total[b] = row;
        }
        Ok(LocalRates {
            subset_total,
            total,
            kingman_pair: 2.0 * measure.kingman_mass(),
        })
    }

    fn total_rate(&self, b: usize) -> f64 {
        if b < 2 {
            return 0.0;
        }
        self.total[b] + binomial(b, 2) * self.kingman_pair
    }
}

/// Exact event-driven simulation up to `horizon`.
pub fn simulate(
    cfg: &CoalescentConfig,
    initial: &LabelledPartition,
    horizon: f64,
    rng: &mut impl Rng,
) -> Result<Trajectory> {
    cfg.validate()?;
    if initial.sample_size() == 0 {
        return Err(Error::InvalidPartition("empty sample".into()));
    }
    match &cfg.space {
        CoalescentSpace::Hierarchical { geom, mig } => {
            simulate_hierarchical(cfg, geom, mig, initial, horizon, rng)
        }
        CoalescentSpace::ImmigrationEmigration { c } => {
            simulate_imm_emi(cfg, *c, initial, horizon, rng)
        }
    }
}

fn simulate_hierarchical(
    cfg: &CoalescentConfig,
    geom: &HierGeometry,
    mig: &MigrationSpec,
    initial: &LabelledPartition,
    horizon: f64,
    rng: &mut impl Rng,
) -> Result<Trajectory> {
    let n_order = geom.order();
    let levels = geom.levels()?;
    let sites = geom.site_count()?;
    for g in initial.labels() {
        if g >= sites {
            return Err(Error::InvalidGeometry(format!("label {g} outside the site space")));
        }
    }
    let kernel = crate::hiergeo::migration_kernel(geom, mig)?;
    let local = LocalRates::build(&cfg.lambdas[0], initial.sample_size())?;
    // Per-block firing rate at level k (zero where no measure is given).
    let block_rate: Vec<f64> = (1..=levels as usize)
        .map(|k| match cfg.lambdas.get(k) {
            Some(m) => m.lambda_star() / (n_order as f64).powi(k as i32),
            None => 0.0,
        })
        .collect();
    // Hazard weights w_d = sum_{k>=d} lambda_k N^-k.
    let hazard_w: Vec<f64> = {
        let nf = n_order as f64;
        let masses: Vec<f64> = (0..=levels as usize)
            .map(|k| {
                cfg.lambdas
                    .get(k)
                    .map(|m| m.lambda() + if k == 0 { 2.0 * m.kingman_mass() } else { 0.0 })
                    .unwrap_or(0.0)
            })
            .collect();
        let mut w = vec![0.0; levels as usize + 1];
        let mut acc = 0.0;
        for k in (0..=levels as usize).rev() {
            acc += masses[k] * nf.powi(-(k as i32));
            w[k] = acc;
        }
        w
    };

    let mut state = initial.clone();
    let mut t = 0.0;
    let mut events = Vec::new();
    let mut hazard = 0.0;
    let mut occupied: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut blocks: Vec<Vec<u64>> = Vec::new();

    loop {
        let b = state.block_count();
        // Rebuild the occupancy indices (samples are small).
        occupied.clear();
        for (i, (_, g)) in state.families().iter().enumerate() {
            occupied.entry(*g).or_default().push(i);
        }
        blocks.clear();
        blocks.resize(levels as usize, Vec::new());
        for k in 1..=levels {
            if block_rate[k as usize - 1] == 0.0 {
                continue;
            }
            let mut ids: Vec<u64> = state.labels().map(|g| geom.block_id(g, k)).collect();
            ids.sort_unstable();
            ids.dedup();
            blocks[k as usize - 1] = ids;
        }

        let mig_rate = b as f64 * kernel.total_rate();
        let coal_rate: f64 = occupied.values().map(|f| local.total_rate(f.len())).sum();
        let blocks_rate: f64 = blocks
            .iter()
            .zip(&block_rate)
            .map(|(ids, r)| ids.len() as f64 * r)
            .sum();
        let total = mig_rate + coal_rate + blocks_rate;
        if total <= 0.0 {
            break;
        }

        let dt = exp_wait(total, rng);
        let t_next = t + dt;
        if cfg.track_hazard && state.block_count() == 2 {
            let d = {
                let gs: Vec<u64> = state.labels().collect();
                geom.distance_idx(gs[0], gs[1]) as usize
            };
            hazard += hazard_w[d.min(levels as usize)] * (t_next.min(horizon) - t);
        }
        if t_next > horizon {
            break;
        }
        t = t_next;

        let mut u = rng.random_range(0.0..total);
        if u < mig_rate {
            // Migration of a uniform family.
            let fam = rng.random_range(0..b);
            let from = state.families()[fam].1;
            let to = kernel.jump(geom, from, rng);
            if to != from {
                let mut families = state.families().to_vec();
                families[fam].1 = to;
                state = LabelledPartition {
                    families,
                    n: state.sample_size(),
                };
                state.normalise();
                events.push(EventRecord {
                    time: t,
                    kind: EventKind::Migration { family: fam, from, to },
                    block_count: state.block_count(),
                });
            }
            continue;
        }
        u -= mig_rate;
        if u < coal_rate {
            // Local coalescence at one site.
            let mut site = 0;
            let mut fams: &Vec<usize> = &Vec::new();
            for (g, f) in occupied.iter() {
                let r = local.total_rate(f.len());
                if u < r {
                    site = *g;
                    fams = f;
                    break;
                }
                u -= r;
            }
            let bb = fams.len();
            let kingman = binomial(bb, 2) * local.kingman_pair;
            if u < kingman {
                // A uniform pair merges.
                let (x, y) = sample_pair(bb, rng);
                let merge = [fams[x], fams[y]];
                state = coalesce_blocks(&state, &merge, site)?;
                events.push(EventRecord {
                    time: t,
                    kind: EventKind::KingmanPair { site },
                    block_count: state.block_count(),
                });
            } else {
                u -= kingman;
                let mut i = 2;
                while i < bb && u >= local.subset_total[bb][i] {
                    u -= local.subset_total[bb][i];
                    i += 1;
                }
                let subset = sample_subset(fams, i, rng);
                state = coalesce_blocks(&state, &subset, site)?;
                events.push(EventRecord {
                    time: t,
                    kind: EventKind::Level0Coalescence { site, merged: i },
                    block_count: state.block_count(),
                });
            }
            continue;
        }
        u -= coal_rate;
        // Block reshuffling-resampling at some level.
        let mut chosen: Option<(u32, u64)> = None;
        for (ki, ids) in blocks.iter().enumerate() {
            let r = block_rate[ki];
            let lvl_rate = ids.len() as f64 * r;
            if u < lvl_rate {
                let which = (u / r) as usize;
                chosen = Some((ki as u32 + 1, ids[which.min(ids.len() - 1)]));
                break;
            }
            u -= lvl_rate;
        }
        let (k, block_id) = chosen.expect("rate bookkeeping selects a block");
        let measure = &cfg.lambdas[k as usize];
        let r = measure.sample_r_star(rng)?;
        let base = block_id * geom.block_size(k);
        let in_block: Vec<usize> = state
            .families()
            .iter()
            .enumerate()
            .filter(|(_, (_, g))| geom.block_id(*g, k) == block_id)
            .map(|(i, _)| i)
            .collect();
        let marked: Vec<usize> = in_block
            .iter()
            .copied()
            .filter(|_| rng.random_bool(r))
            .collect();
        let coalesced = marked.len() >= 2;
        let mut next = if coalesced {
            coalesce_blocks(&state, &marked, base)?
        } else {
            state.clone()
        };
        // Reshuffle every family in the block, merged or not.
        let mut targets = Vec::new();
        for (_, g) in next.families.iter_mut() {
            if geom.block_id(*g, k) == block_id {
                *g = geom.uniform_in_block(base, k, rng);
                targets.push(*g);
            }
        }
        next.normalise();
        state = next;
        events.push(EventRecord {
            time: t,
            kind: EventKind::BlockEvent {
                level: k,
                block: block_id,
                r,
                marks: marked.len(),
                coalesced,
                reshuffle_targets: targets,
            },
            block_count: state.block_count(),
        });
    }

    Ok(Trajectory {
        events,
        final_partition: state,
        hazard,
    })
}

fn simulate_imm_emi(
    cfg: &CoalescentConfig,
    c: f64,
    initial: &LabelledPartition,
    horizon: f64,
    rng: &mut impl Rng,
) -> Result<Trajectory> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::parameter("emigration rate must be finite and >= 0"));
    }
    for g in initial.labels() {
        if g != 0 && g != CEMETERY {
            return Err(Error::InvalidGeometry(
                "labels on {0,*} must be 0 or the cemetery".into(),
            ));
        }
    }
    let local = LocalRates::build(&cfg.lambdas[0], initial.sample_size())?;
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut events = Vec::new();

    loop {
        let at_zero: Vec<usize> = state
            .families()
            .iter()
            .enumerate()
            .filter(|(_, (_, g))| *g == 0)
            .map(|(i, _)| i)
            .collect();
        let b0 = at_zero.len();
        let emi_rate = c * b0 as f64;
        let coal_rate = local.total_rate(b0);
        let total = emi_rate + coal_rate;
        if total <= 0.0 {
            break;
        }
        t += exp_wait(total, rng);
        if t > horizon {
            break;
        }
        let mut u = rng.random_range(0.0..total);
        if u < emi_rate {
            let fam = at_zero[rng.random_range(0..b0)];
            let from = state.families()[fam].1;
            let mut families = state.families().to_vec();
            families[fam].1 = CEMETERY;
            state = LabelledPartition {
                families,
                n: state.sample_size(),
            };
            state.normalise();
            events.push(EventRecord {
                time: t,
                kind: EventKind::Migration {
                    family: fam,
                    from,
                    to: CEMETERY,
                },
                block_count: state.block_count(),
            });
            continue;
        }
        u -= emi_rate;
        let kingman = binomial(b0, 2) * local.kingman_pair;
        if u < kingman {
            let (x, y) = sample_pair(b0, rng);
            let merge = [at_zero[x], at_zero[y]];
            state = coalesce_blocks(&state, &merge, 0)?;
            events.push(EventRecord {
                time: t,
                kind: EventKind::KingmanPair { site: 0 },
                block_count: state.block_count(),
            });
        } else {
            u -= kingman;
            let mut i = 2;
            while i < b0 && u >= local.subset_total[b0][i] {
                u -= local.subset_total[b0][i];
                i += 1;
            }
            let subset = sample_subset(&at_zero, i, rng);
            state = coalesce_blocks(&state, &subset, 0)?;
            events.push(EventRecord {
                time: t,
                kind: EventKind::Level0Coalescence { site: 0, merged: i },
                block_count: state.block_count(),
            });
        }
    }

    Ok(Trajectory {
        events,
        final_partition: state,
        hazard: 0.0,
    })
}

/// Two distinct indices in `0..n`, uniform over unordered pairs.
fn sample_pair(n: usize, rng: &mut impl Rng) -> (usize, usize) {
    let x = rng.random_range(0..n);
    let mut y = rng.random_range(0..n - 1);
    if y >= x {
        y += 1;
    }
    (x, y)
}

/// Uniform `i`-subset of the given indices.
fn sample_subset(pool: &[usize], i: usize, rng: &mut impl Rng) -> Vec<usize> {
    debug_assert!(i <= pool.len());
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    let mut chosen = Vec::with_capacity(i);
    for j in 0..i {
        let pick = rng.random_range(j..idx.len());
        idx.swap(j, pick);
        chosen.push(pool[idx[j]]);
    }
    chosen
}

/// Exact absorption law on `{0,*}`: distribution of the number of families
/// remaining once every lineage has emigrated. Solved by downward recursion
/// over (families at 0, families absorbed); the chain is acyclic because
/// every transition lowers one of the two counters.
pub fn absorption_probs_exact(
    n: usize,
    c: f64,
    d: f64,
    lam: &LambdaMeasure,
) -> Result<Vec<f64>> {
    const CAP: usize = 6;
    if n == 0 {
        return Err(Error::parameter("sample size must be positive"));
    }
    if n > CAP {
        return Err(Error::AbsorptionCapExceeded { n, cap: CAP });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::parameter("emigration rate must be positive"));
    }
    if d < 0.0 {
        return Err(Error::parameter("Kingman volatility must be >= 0"));
    }

    // dist[b0][bs] = distribution of the final family count.
    let mut dist: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; n + 1]; n + 1];
    fn solve(
        b0: usize,
        bs: usize,
        n: usize,
        c: f64,
        d: f64,
        lam: &LambdaMeasure,
        dist: &mut Vec<Vec<Option<Vec<f64>>>>,
    ) -> Result<Vec<f64>> {
        if let Some(v) = &dist[b0][bs] {
            return Ok(v.clone());
        }
        let v = if b0 == 0 {
            let mut v = vec![0.0; n + 1];
            v[bs] = 1.0;
            v
        } else {
            let mut total = c * b0 as f64;
            let mut terms: Vec<(f64, (usize, usize))> = vec![(c * b0 as f64, (b0 - 1, bs + 1))];
            if b0 >= 2 {
                let kingman = binomial(b0, 2) * 2.0 * d;
                if kingman > 0.0 {
                    total += kingman;
                    terms.push((kingman, (b0 - 1, bs)));
                }
                for i in 2..=b0 {
                    let rate = lam.coalescence_rate(b0, i)? * binomial(b0, i);
                    if rate > 0.0 {
                        total += rate;
                        terms.push((rate, (b0 - i + 1, bs)));
                    }
                }
            }
            let mut v = vec![0.0; n + 1];
            for (rate, (nb0, nbs)) in terms {
                let sub = solve(nb0, nbs, n, c, d, lam, dist)?;
                let w = rate / total;
                for (acc, x) in v.iter_mut().zip(&sub) {
                    *acc += w * x;
                }
            }
            v
        };
        dist[b0][bs] = Some(v.clone());
        Ok(v)
    }
    let v = solve(n, 0, n, c, d, lam, &mut dist)?;
    Ok(v[1..=n].to_vec())
}

/// Exact absorption law over labelled set partitions of `0..n` (used for
/// mixed moments); capped at small samples since the state space is the set
/// of two-coloured partitions.
pub fn absorption_partition_distribution(
    n: usize,
    c: f64,
    d: f64,
    lam: &LambdaMeasure,
) -> Result<Vec<(Vec<Vec<usize>>, f64)>> {
    const CAP: usize = 6;
    if n == 0 || n > CAP {
        return Err(Error::AbsorptionCapExceeded { n, cap: CAP });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::parameter("emigration rate must be positive"));
    }

    type State = (Vec<Vec<usize>>, Vec<Vec<usize>>); // (at 0, absorbed)
    fn canon(mut fams: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        for f in fams.iter_mut() {
            f.sort_unstable();
        }
        fams.sort();
        fams
    }

    let mut memo: HashMap<State, HashMap<Vec<Vec<usize>>, f64>> = HashMap::new();

    fn solve(
        state: &State,
        c: f64,
        d: f64,
        lam: &LambdaMeasure,
        memo: &mut HashMap<State, HashMap<Vec<Vec<usize>>, f64>>,
    ) -> Result<HashMap<Vec<Vec<usize>>, f64>> {
        if let Some(v) = memo.get(state) {
            return Ok(v.clone());
        }
        let (at0, absorbed) = state;
        let b0 = at0.len();
        let mut out: HashMap<Vec<Vec<usize>>, f64> = HashMap::new();
        if b0 == 0 {
            out.insert(absorbed.clone(), 1.0);
            memo.insert(state.clone(), out.clone());
            return Ok(out);
        }
        struct Move {
            rate: f64,
            next: (Vec<Vec<usize>>, Vec<Vec<usize>>),
        }
        let mut moves: Vec<Move> = Vec::new();
        // Emigration of each family.
        for i in 0..b0 {
            let mut a0 = at0.clone();
            let fam = a0.remove(i);
            let mut abs = absorbed.clone();
            abs.push(fam);
            moves.push(Move {
                rate: c,
                next: (canon(a0), canon(abs)),
            });
        }
        if b0 >= 2 {
            // Kingman pairs.
            if d > 0.0 {
                for i in 0..b0 {
                    for j in i + 1..b0 {
                        let mut a0 = at0.clone();
                        let fj = a0.remove(j);
                        a0[i].extend(fj);
                        moves.push(Move {
                            rate: 2.0 * d,
                            next: (canon(a0), absorbed.clone()),
                        });
                    }
                }
            }
            // Lambda subsets.
            for i in 2..=b0 {
                let rate = lam.coalescence_rate(b0, i)?;
                if rate == 0.0 {
                    continue;
                }
                for subset in subsets_of_size(b0, i) {
                    let mut merged: Vec<usize> = Vec::new();
                    let mut a0 = Vec::new();
                    for (idx, fam) in at0.iter().enumerate() {
                        if subset.contains(&idx) {
                            merged.extend(fam.iter().copied());
                        } else {
                            a0.push(fam.clone());
                        }
                    }
                    a0.push(merged);
                    moves.push(Move {
                        rate,
                        next: (canon(a0), absorbed.clone()),
                    });
                }
            }
        }
        let total: f64 = moves.iter().map(|m| m.rate).sum();
        for m in moves {
            let sub = solve(&m.next, c, d, lam, memo)?;
            let w = m.rate / total;
            for (partition, p) in sub {
                *out.entry(partition).or_insert(0.0) += w * p;
            }
        }
        memo.insert(state.clone(), out.clone());
        Ok(out)
    }

    let initial: State = ((0..n).map(|i| vec![i]).collect(), Vec::new());
    let sol = solve(&initial, c, d, lam, &mut memo)?;
    let mut out: Vec<(Vec<Vec<usize>>, f64)> = sol.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Monte-Carlo estimate of the expected pair hazard over a finite horizon.
///
/// The two lineages are collapsed into their difference walk (one walk at
/// doubled speed); only its hierarchical distance from the origin matters,
/// so the simulation runs on the distance chain directly.
pub fn pair_hazard_mc(
    n: u32,
    mig: &MigrationSpec,
    lambdas: &[f64],
    horizon: f64,
    reps: u64,
    seed: u64,
) -> Result<Estimate> {
    if n < 2 {
        return Err(Error::InvalidGeometry("order must be >= 2".into()));
    }
    if lambdas.iter().all(|l| *l == 0.0) {
        return Ok(Estimate {
            mean: 0.0,
            se: 0.0,
            reps,
        });
    }
    let nf = n as f64;
    // Simulated levels: the lambda support plus enough headroom that jumps
    // beyond the cap are negligible at this order.
    let support = lambdas.len();
    let max_level = support + (46.0 / nf.log2()).ceil() as usize + 8;
    let rates: Vec<f64> = (1..=max_level)
        .map(|k| 2.0 * mig.coeff(k - 1, n) / nf.powi(k as i32 - 1))
        .collect();
    let total_rate: f64 = rates.iter().sum();
    if !total_rate.is_finite() {
        return Err(Error::NonSummableMigration(
            "difference-walk jump rates do not sum".into(),
        ));
    }
    // Suffix rates from each distance.
    let mut suffix = vec![0.0; max_level + 2];
    for k in (1..=max_level).rev() {
        suffix[k] = suffix[k + 1] + rates[k - 1];
    }
    // Hazard weights.
    let mut w = vec![0.0; max_level + 2];
    {
        let mut acc = 0.0;
        for k in (0..=max_level).rev() {
            let lam = lambdas.get(k).copied().unwrap_or(0.0);
            acc += lam * nf.powi(-(k as i32));
            w[k] = acc;
        }
    }
    // Distance distribution of a uniform point of a radius-k ball.
    let shell_cum: Vec<Vec<f64>> = (1..=max_level)
        .map(|k| {
            let mut cum = Vec::with_capacity(k + 1);
            let mut acc = 0.0;
            for m in 0..=k {
                acc += crate::hiergeo::shell_count(n, m as u32) / nf.powi(k as i32);
                cum.push(acc);
            }
            cum
        })
        .collect();

    let mut stats = RunningStats::new();
    for rep in 0..reps {
        let mut rng = crate::rng::stream_rng(seed, rep);
        let mut dist = 0usize;
        let mut t = 0.0;
        let mut h = 0.0;
        loop {
            let active = dist.max(1);
            let rate = suffix[active];
            let dt = if rate > 0.0 {
                exp_wait(rate, &mut rng)
            } else {
                f64::INFINITY
            };
            let t_next = (t + dt).min(horizon);
            h += w[dist] * (t_next - t);
            t = t_next;
            if t >= horizon {
                break;
            }
            // Select the jump level among k >= active.
            let mut u = rng.random_range(0.0..rate);
            let mut k = active;
            while k < max_level && u >= rates[k - 1] {
                u -= rates[k - 1];
                k += 1;
            }
            // New distance: uniform point of B_k(0).
            let v: f64 = rng.random();
            let cum = &shell_cum[k - 1];
            dist = cum.partition_point(|&c| c < v).min(k);
        }
        stats.push(h);
    }
    Ok(stats.into())
}
