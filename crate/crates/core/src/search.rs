//! Guarded backtracking with nogood discovery and backjumping.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::nogood::{
    conflict, encode_nogood, matches_record, AncestorArray, DeadendFold, NodeId, NogoodRecord,
    NogoodStore, QuerySet, MAX_QUERY_VERTICES,
};
use crate::parallel::{StealHandle, SHARE_MIN_CANDIDATES};
use crate::plan::{build_gcs, build_matching_order, filter_candidates, Gcs, MatchingOrder};
use crate::reservation::{generate_reservation_guards, matches_reservation, MAX_RESERVATION_SIZE};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchConfig {
    pub embedding_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub reservation_size: usize,
    pub use_reservation: bool,
    pub use_nv: bool,
    pub use_ne: bool,
    pub use_backjump: bool,
    pub threads: usize,
    pub emit_embeddings: bool,
    /// Unused by the deterministic engine; kept so runs can be labelled.
    pub seed: u64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            embedding_limit: Some(100_000),
            time_limit: None,
            reservation_size: 3,
            use_reservation: true,
            use_nv: true,
            use_ne: true,
            use_backjump: true,
            threads: 1,
            emit_embeddings: false,
            seed: 0,
        }
    }
}

impl MatchConfig {
    /// Every guard on, no limits, embeddings collected.
    pub fn exhaustive() -> MatchConfig {
        MatchConfig {
            embedding_limit: None,
            emit_embeddings: true,
            ..MatchConfig::default()
        }
    }

    /// Same limits, every guard and backjumping disabled.
    pub fn baseline(mut self) -> MatchConfig {
        self.use_reservation = false;
        self.use_nv = false;
        self.use_ne = false;
        self.use_backjump = false;
        self
    }

    /// Toggle combination from the low four bits: reservation, NV, NE, backjump.
    pub fn with_toggles(mut self, bits: u8) -> MatchConfig {
        self.use_reservation = bits & 1 != 0;
        self.use_nv = bits & 2 != 0;
        self.use_ne = bits & 4 != 0;
        self.use_backjump = bits & 8 != 0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reservation_size > MAX_RESERVATION_SIZE {
            return Err(Error::InvalidConfig(format!(
                "reservation size {} exceeds {MAX_RESERVATION_SIZE}",
                self.reservation_size
            )));
        }
        if self.threads == 0 {
            return Err(Error::InvalidConfig(
                "thread count must be at least 1".into(),
            ));
        }
        if self.embedding_limit == Some(0) {
            return Err(Error::InvalidConfig(
                "embedding limit must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Guard size used when building a plan for this configuration.
    pub fn effective_reservation_size(&self) -> usize {
        if self.use_reservation {
            self.reservation_size
        } else {
            0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    #[default]
    Complete,
    EmbeddingLimit,
    TimeLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Complete => "complete",
            Termination::EmbeddingLimit => "embedding-limit",
            Termination::TimeLimit => "time-limit",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchStats {
    pub recursions: u64,
    pub embeddings: u64,
    pub pruned_injectivity: u64,
    pub pruned_reservation: u64,
    pub pruned_nv: u64,
    pub pruned_ne: u64,
    pub pruned_no_candidate: u64,
    pub backjumps: u64,
    pub nv_records: u64,
    pub ne_records: u64,
    pub termination: Termination,
}

impl MatchStats {
    pub fn merge(&mut self, o: &MatchStats) {
        self.recursions += o.recursions;
        self.embeddings += o.embeddings;
        self.pruned_injectivity += o.pruned_injectivity;
        self.pruned_reservation += o.pruned_reservation;
        self.pruned_nv += o.pruned_nv;
        self.pruned_ne += o.pruned_ne;
        self.pruned_no_candidate += o.pruned_no_candidate;
        self.backjumps += o.backjumps;
        self.nv_records += o.nv_records;
        self.ne_records += o.ne_records;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlanTimings {
    pub filter: Duration,
    pub gcs: Duration,
    pub reservation: Duration,
}

#[derive(Clone, Debug)]
pub struct MatchResult {
    /// Indexed by original query vertex id. Empty unless embeddings were requested.
    pub embeddings: Vec<Vec<VertexId>>,
    pub stats: MatchStats,
    pub order: Vec<usize>,
    pub timings: PlanTimings,
    pub search_time: Duration,
}

/// Hooks into the sequential search. Positions and prefixes are in matching-order
/// space; `prefix[p]` is the data vertex assigned to position `p`.
pub trait SearchObserver {
    fn node_entered(&mut self, _id: NodeId, _prefix: &[VertexId]) {}
    fn nogood_tested(&mut self, _rec: &NogoodRecord, _prefix: &[VertexId], _matched: bool) {}
    fn nv_recorded(&mut self, _pos: usize, _v: VertexId, _rec: &NogoodRecord) {}
    fn ne_recorded(
        &mut self,
        _from: (usize, VertexId),
        _to: (usize, VertexId),
        _rec: &NogoodRecord,
    ) {
    }
    fn backjumped(&mut self, _prefix: &[VertexId], _skipped: &[VertexId]) {}
    /// Local candidate set of the later position `pos` under `prefix` extended by `v`,
    /// as indices into its candidate list, with the positions it depends on.
    fn local_candidates(
        &mut self,
        _pos: usize,
        _prefix: &[VertexId],
        _v: VertexId,
        _frame: &[u32],
        _bound: QuerySet,
    ) {
    }
}

impl SearchObserver for () {}

#[derive(Clone, Debug)]
pub struct PlanOptions {
    pub reservation_size: usize,
    /// Explicit matching order (original vertex ids); the greedy order otherwise.
    pub order: Option<Vec<usize>>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            reservation_size: 3,
            order: None,
        }
    }
}

/// A query compiled against one data graph.
#[derive(Clone, Debug)]
pub struct Plan {
    gcs: Gcs,
    timings: PlanTimings,
}

impl Plan {
    pub fn build(q: &Graph, g: &Graph, opts: &PlanOptions) -> Result<Plan> {
        let n = q.vertex_count();
        if n == 0 {
            return Err(Error::EmptyQuery);
        }
        if n > MAX_QUERY_VERTICES {
            return Err(Error::QueryTooLarge {
                vertices: n,
                max: MAX_QUERY_VERTICES,
            });
        }
        if !q.is_connected() {
            return Err(Error::DisconnectedQuery);
        }
        if opts.reservation_size > MAX_RESERVATION_SIZE {
            return Err(Error::InvalidConfig(format!(
                "reservation size {} exceeds {MAX_RESERVATION_SIZE}",
                opts.reservation_size
            )));
        }
        let t0 = Instant::now();
        let c = filter_candidates(q, g);
        let t1 = Instant::now();
        let order = match &opts.order {
            Some(o) => MatchingOrder::new(q, o.clone())?,
            None => build_matching_order(q, &c)?,
        };
        let mut gcs = build_gcs(q, g, &c, &order)?;
        let t2 = Instant::now();
        generate_reservation_guards(&mut gcs, opts.reservation_size);
        let t3 = Instant::now();
        Ok(Plan {
            gcs,
            timings: PlanTimings {
                filter: t1 - t0,
                gcs: t2 - t1,
                reservation: t3 - t2,
            },
        })
    }

    pub fn from_gcs(gcs: Gcs) -> Plan {
        Plan {
            gcs,
            timings: PlanTimings::default(),
        }
    }

    pub fn gcs(&self) -> &Gcs {
        &self.gcs
    }

    pub fn timings(&self) -> PlanTimings {
        self.timings
    }

    pub fn search(&self, cfg: &MatchConfig) -> Result<MatchResult> {
        cfg.validate()?;
        if cfg.threads > 1 {
            return Ok(crate::parallel::run_parallel(self, cfg));
        }
        Ok(self.search_observed(cfg, &mut ()))
    }

    /// Single-threaded search reporting to `obs`.
    pub fn search_observed<O: SearchObserver>(
        &self,
        cfg: &MatchConfig,
        obs: &mut O,
    ) -> MatchResult {
        let start = Instant::now();
        let ctl = Control::new(cfg);
        let mut w = Worker::new(&self.gcs, cfg, &ctl, obs, 0, None);
        w.run_root();
        let mut stats = w.stats.clone();
        let embeddings = std::mem::take(&mut w.embeddings);
        drop(w);
        stats.termination = ctl.termination();
        MatchResult {
            embeddings,
            stats,
            order: self.gcs.order().as_slice().to_vec(),
            timings: self.timings,
            search_time: start.elapsed(),
        }
    }
}

pub fn match_query(q: &Graph, g: &Graph, cfg: &MatchConfig) -> Result<MatchResult> {
    cfg.validate()?;
    let plan = Plan::build(
        q,
        g,
        &PlanOptions {
            reservation_size: cfg.effective_reservation_size(),
            order: None,
        },
    )?;
    plan.search(cfg)
}

/// Same as [`match_query`] with at least two workers.
pub fn parallel_match(q: &Graph, g: &Graph, cfg: &MatchConfig) -> Result<MatchResult> {
    let mut cfg = cfg.clone();
    cfg.threads = cfg.threads.max(2);
    match_query(q, g, &cfg)
}

/// Run-wide limits shared by all workers.
pub(crate) struct Control {
    limit: Option<u64>,
    emitted: AtomicU64,
    stop: AtomicBool,
    reason: AtomicU8,
    deadline: Option<Instant>,
}

impl Control {
    pub(crate) fn new(cfg: &MatchConfig) -> Control {
        Control {
            limit: cfg.embedding_limit,
            emitted: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            reason: AtomicU8::new(0),
            deadline: cfg.time_limit.map(|d| Instant::now() + d),
        }
    }

    fn halt(&self, why: Termination) {
        let code = match why {
            Termination::Complete => 0,
            Termination::EmbeddingLimit => 1,
            Termination::TimeLimit => 2,
        };
        let _ = self
            .reason
            .compare_exchange(0, code, Ordering::SeqCst, Ordering::SeqCst);
        self.stop.store(true, Ordering::SeqCst);
    }

    pub(crate) fn stopped(&self) -> bool {
        self.stop.load(Ordering::Relaxed)
    }

    pub(crate) fn termination(&self) -> Termination {
        match self.reason.load(Ordering::SeqCst) {
            1 => Termination::EmbeddingLimit,
            2 => Termination::TimeLimit,
            _ => Termination::Complete,
        }
    }
}

/// Result of searching below a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Found,
    /// Proven deadend with this mask.
    Dead(QuerySet),
    /// Truncated or split; nothing can be concluded.
    Unknown,
}

/// Fixed mask result for one tracked target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fixed {
    Mask(QuerySet),
    Found,
    Unknown,
}

#[derive(Clone, Copy, Debug)]
struct Target {
    pos: usize,
    cand: u32,
    slot: usize,
    found: bool,
}

#[derive(Clone, Copy, Debug, Default)]
struct FixedAcc {
    union: QuerySet,
    short: Option<QuerySet>,
    unknown: bool,
    own: Option<Fixed>,
}

const NONE: u32 = u32::MAX;
const TIME_POLL: u64 = 1024;

pub(crate) struct Worker<'a, O: SearchObserver> {
    gcs: &'a Gcs,
    cfg: &'a MatchConfig,
    ctl: &'a Control,
    obs: &'a mut O,
    n: usize,
    assign: Vec<VertexId>,
    assign_idx: Vec<u32>,
    owner: Vec<u32>,
    frames: Vec<Vec<Vec<u32>>>,
    bounds: Vec<Vec<QuerySet>>,
    pool: Vec<Vec<u32>>,
    anc: AncestorArray,
    next_id: u64,
    store: NogoodStore,
    targets: Vec<Target>,
    fixed_out: Vec<Fixed>,
    alive: Vec<Vec<u32>>,
    facc: Vec<Vec<FixedAcc>>,
    pub(crate) stats: MatchStats,
    pub(crate) embeddings: Vec<Vec<VertexId>>,
    aborted: bool,
    steal: Option<StealHandle<'a>>,
}

impl<'a, O: SearchObserver> Worker<'a, O> {
    pub(crate) fn new(
        gcs: &'a Gcs,
        cfg: &'a MatchConfig,
        ctl: &'a Control,
        obs: &'a mut O,
        thread: usize,
        steal: Option<StealHandle<'a>>,
    ) -> Worker<'a, O> {
        let n = gcs.query_size();
        let base = (thread as u64) << 48;
        Worker {
            gcs,
            cfg,
            ctl,
            obs,
            n,
            assign: vec![VertexId::MAX; n],
            assign_idx: vec![NONE; n],
            owner: vec![NONE; gcs.data_vertex_count()],
            frames: (0..n)
                .map(|p| vec![(0..gcs.candidates(p).len() as u32).collect()])
                .collect(),
            bounds: vec![vec![QuerySet::EMPTY]; n],
            pool: Vec::new(),
            anc: AncestorArray::new(NodeId(base)),
            next_id: base + 1,
            store: NogoodStore::new(
                if cfg.use_nv {
                    gcs.total_candidates()
                } else {
                    0
                },
                if cfg.use_ne { gcs.ne_slot_count() } else { 0 },
            ),
            targets: Vec::new(),
            fixed_out: Vec::new(),
            alive: vec![Vec::new(); n + 1],
            facc: vec![Vec::new(); n + 1],
            stats: MatchStats::default(),
            embeddings: Vec::new(),
            aborted: false,
            steal,
        }
    }

    fn has_empty_candidates(&self) -> bool {
        (0..self.n).any(|p| self.gcs.candidates(p).is_empty())
    }

    /// Searches the whole tree from the empty embedding.
    pub(crate) fn run_root(&mut self) {
        if self.has_empty_candidates() {
            self.stats.recursions += 1;
            return;
        }
        self.visit(0);
        self.debug_assert_unwound();
    }

    fn debug_assert_unwound(&self) {
        debug_assert_eq!(self.anc.depth(), 0);
        debug_assert!(self.assign.iter().all(|&x| x == VertexId::MAX));
        debug_assert!(self.owner.iter().all(|&o| o == NONE));
        debug_assert!(self.frames.iter().all(|f| f.len() == 1));
        debug_assert!(self.bounds.iter().all(|b| b.len() == 1 && b[0].is_empty()));
        debug_assert!(self.targets.is_empty());
    }

    /// Replays a stolen prefix and searches the stolen candidates of the next position.
    pub(crate) fn run_task(&mut self, prefix: &[u32], list: Vec<u32>) {
        let depth = prefix.len();
        let mut done = 0;
        let mut ok = true;
        for (p, &a) in prefix.iter().enumerate() {
            let x = self.gcs.candidates(p)[a as usize];
            if self.refine(p, a as usize).is_err() {
                ok = false;
                break;
            }
            self.assign_at(p, a, x);
            if let Some(s) = &self.steal {
                s.set_prefix(p, a);
            }
            done += 1;
        }
        if ok && !self.ctl.stopped() {
            self.alive[depth].clear();
            let frame = self.frames[depth].last().unwrap();
            let list: Vec<u32> = list
                .into_iter()
                .filter(|b| frame.binary_search(b).is_ok())
                .collect();
            if !list.is_empty() {
                self.run_level(depth, Some(list));
            }
        }
        for p in (0..done).rev() {
            self.unassign_at(p);
            self.undo_refine(p, self.gcs.forward(p).len());
        }
        self.debug_assert_unwound();
    }

    fn new_id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    fn visit(&mut self, k: usize) -> Outcome {
        self.stats.recursions += 1;
        if self.stats.recursions.is_multiple_of(TIME_POLL) {
            if let Some(d) = self.ctl.deadline {
                if Instant::now() >= d {
                    self.ctl.halt(Termination::TimeLimit);
                }
            }
        }
        if self.aborted || self.ctl.stopped() {
            self.aborted = true;
            return Outcome::Unknown;
        }
        self.obs.node_entered(self.anc.get(k), &self.assign[..k]);
        if k == self.n {
            return self.emit();
        }
        self.run_level(k, None)
    }

    fn emit(&mut self) -> Outcome {
        if let Some(limit) = self.ctl.limit {
            let prev = self.ctl.emitted.fetch_add(1, Ordering::SeqCst);
            if prev >= limit {
                self.ctl.halt(Termination::EmbeddingLimit);
                self.aborted = true;
                return Outcome::Unknown;
            }
            if prev + 1 == limit {
                self.ctl.halt(Termination::EmbeddingLimit);
            }
        }
        self.stats.embeddings += 1;
        if self.cfg.emit_embeddings {
            let mut e = vec![0; self.n];
            for p in 0..self.n {
                e[self.gcs.order().vertex(p)] = self.assign[p];
            }
            self.embeddings.push(e);
        }
        for t in &mut self.targets {
            if !t.found && self.assign_idx[t.pos] == t.cand {
                t.found = true;
            }
        }
        Outcome::Found
    }

    fn is_shallow(&self, k: usize) -> bool {
        self.steal.is_some() && 2 * k < self.n
    }

    fn run_level(&mut self, k: usize, stolen: Option<Vec<u32>>) -> Outcome {
        let partial = stolen.is_some();
        let took = !partial;
        let list = match stolen {
            Some(l) => l,
            None => std::mem::take(self.frames[k].last_mut().unwrap()),
        };
        let alive = std::mem::take(&mut self.alive[k]);
        let mut facc = std::mem::take(&mut self.facc[k]);
        facc.clear();
        facc.resize(alive.len(), FixedAcc::default());

        let shared = self.is_shallow(k) && list.len() >= SHARE_MIN_CANDIDATES;
        if shared {
            self.steal.as_ref().unwrap().publish(k, &list);
        }
        let mut fold = DeadendFold::new();
        let mut found = false;
        let mut unknown = false;
        let mut next = 0;
        loop {
            let i = if shared {
                match self.steal.as_ref().unwrap().claim() {
                    Some(i) => i,
                    None => break,
                }
            } else {
                if next >= list.len() {
                    break;
                }
                next += 1;
                next - 1
            };
            let a = list[i] as usize;
            let (out, conflict) = self.try_child(k, a, &alive);
            let conflicted = conflict.is_some();
            if self.aborted {
                break;
            }
            for (slot, &tid) in alive.iter().enumerate() {
                let t = self.targets[tid as usize];
                let acc = &mut facc[slot];
                if t.pos == k {
                    if t.cand as usize == a {
                        acc.own = Some(match out {
                            Outcome::Dead(m) => Fixed::Mask(m.without(k)),
                            Outcome::Found => Fixed::Found,
                            Outcome::Unknown => Fixed::Unknown,
                        });
                    }
                    continue;
                }
                let child = if conflicted {
                    match out {
                        Outcome::Dead(m) => Fixed::Mask(m),
                        _ => unreachable!("conflicts are deadends"),
                    }
                } else {
                    self.fixed_out[tid as usize]
                };
                match child {
                    Fixed::Mask(m) => {
                        if acc.short.is_none() {
                            if m.contains(k) {
                                acc.union |= m;
                            } else {
                                acc.short = Some(m);
                            }
                        }
                    }
                    Fixed::Unknown => acc.unknown = true,
                    Fixed::Found => {}
                }
            }
            match out {
                Outcome::Dead(m) => {
                    if m.contains(k) && conflict.unwrap_or(true) {
                        self.record_nv(k, a, m);
                    }
                    let had_short = fold.short_circuit().is_some();
                    fold.add(m, k);
                    if !had_short && !m.contains(k) && self.cfg.use_backjump {
                        self.stats.backjumps += 1;
                        if !shared {
                            let skipped: Vec<VertexId> = list[next..]
                                .iter()
                                .map(|&b| self.gcs.candidates(k)[b as usize])
                                .collect();
                            self.obs.backjumped(&self.assign[..k], &skipped);
                        } else {
                            self.obs.backjumped(&self.assign[..k], &[]);
                        }
                        break;
                    }
                }
                Outcome::Found => found = true,
                Outcome::Unknown => unknown = true,
            }
        }
        let split = if shared {
            self.steal.as_ref().unwrap().unpublish()
        } else {
            false
        };
        let partial = partial || split;
        unknown |= partial;

        if !self.aborted {
            let bound = *self.bounds[k].last().unwrap();
            for (slot, &tid) in alive.iter().enumerate() {
                let t = self.targets[tid as usize];
                let acc = facc[slot];
                let res = if t.found {
                    Fixed::Found
                } else if t.pos == k {
                    match (acc.own, fold.short_circuit()) {
                        (Some(f), _) => f,
                        (None, Some(s)) => Fixed::Mask(s),
                        (None, None) => Fixed::Unknown,
                    }
                } else if let Some(s) = acc.short.or(fold.short_circuit()) {
                    Fixed::Mask(s)
                } else if acc.unknown || partial {
                    Fixed::Unknown
                } else {
                    Fixed::Mask((acc.union | bound).without(k))
                };
                self.fixed_out[tid as usize] = res;
            }
        }

        if took {
            *self.frames[k].last_mut().unwrap() = list;
        }
        self.alive[k] = alive;
        self.facc[k] = facc;

        if self.aborted {
            Outcome::Unknown
        } else if found {
            Outcome::Found
        } else if let Some(s) = fold.short_circuit() {
            Outcome::Dead(s)
        } else if unknown {
            Outcome::Unknown
        } else {
            Outcome::Dead(fold.finish(*self.bounds[k].last().unwrap(), k))
        }
    }

    fn record_nv(&mut self, k: usize, a: usize, mask: QuerySet) {
        if !self.cfg.use_nv {
            return;
        }
        let rec = encode_nogood(mask.without(k), &self.anc);
        let slot = self.gcs.vertex_slot(k, a);
        self.store.record_nv(slot, rec);
        self.stats.nv_records += 1;
        self.obs.nv_recorded(k, self.gcs.candidates(k)[a], &rec);
    }

    fn assign_at(&mut self, k: usize, a: u32, x: VertexId) {
        self.assign[k] = x;
        self.assign_idx[k] = a;
        self.owner[x as usize] = k as u32;
        let id = self.new_id();
        self.anc.push(id);
    }

    fn unassign_at(&mut self, k: usize) {
        let x = self.assign[k];
        self.owner[x as usize] = NONE;
        self.assign[k] = VertexId::MAX;
        self.assign_idx[k] = NONE;
        self.anc.pop();
    }

    /// Checks the vertex-level guards of the `a`-th candidate at position `k`. The
    /// flag tells whether the conflict is worth storing as a vertex nogood;
    /// injectivity is rechecked directly anyway.
    fn vertex_conflict(&mut self, k: usize, a: usize, x: VertexId) -> Option<(QuerySet, bool)> {
        let owner = self.owner[x as usize];
        if owner != NONE {
            self.stats.pruned_injectivity += 1;
            return Some((conflict::injectivity(owner as usize, k), false));
        }
        if self.cfg.use_reservation {
            let guard = self.gcs.reservation(k, a);
            if !guard.trivial && matches_reservation(guard, |w| self.owner[w as usize] != NONE) {
                self.stats.pruned_reservation += 1;
                let owners = guard
                    .vertices
                    .iter()
                    .map(|&w| self.owner[w as usize] as usize);
                return Some((conflict::reservation(owners, k), true));
            }
        }
        if self.cfg.use_nv {
            if let Some(rec) = self.store.nv(self.gcs.vertex_slot(k, a)).copied() {
                let hit = matches_record(&rec, &self.anc, k);
                self.obs.nogood_tested(&rec, &self.assign[..k], hit);
                if hit {
                    self.stats.pruned_nv += 1;
                    return Some((conflict::vertex_nogood(&rec, k), true));
                }
            }
        }
        None
    }

    /// Pushes refined frames for the later neighbors of `k`. On an emptied frame,
    /// undoes its pushes and returns the no-candidate conflict mask.
    fn refine(&mut self, k: usize, a: usize) -> std::result::Result<(), QuerySet> {
        let gcs = self.gcs;
        let forward = gcs.forward(k);
        for (done, &(j, e)) in forward.iter().enumerate() {
            let edge = gcs.edge(e);
            let targets = edge.targets(a);
            let mut new = self.pool.pop().unwrap_or_default();
            new.clear();
            let old = self.frames[j].last().unwrap();
            let mut bound = *self.bounds[j].last().unwrap();
            let (mut x, mut y) = (0, 0);
            while x < old.len() && y < targets.len() {
                match old[x].cmp(&targets[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        let b = old[x];
                        let mut keep = true;
                        if self.cfg.use_ne {
                            if let Some(slot) = edge.ne_slot(a, y) {
                                if let Some(rec) = self.store.ne(slot) {
                                    let hit = matches_record(rec, &self.anc, k);
                                    self.obs.nogood_tested(rec, &self.assign[..k], hit);
                                    if hit {
                                        bound |= rec.domain;
                                        self.stats.pruned_ne += 1;
                                        keep = false;
                                    }
                                }
                            }
                        }
                        if keep {
                            new.push(b);
                        }
                        x += 1;
                        y += 1;
                    }
                }
            }
            if new.len() < old.len() {
                bound.insert(k);
            }
            let empty = new.is_empty();
            self.obs
                .local_candidates(j, &self.assign[..k], gcs.candidates(k)[a], &new, bound);
            self.frames[j].push(new);
            self.bounds[j].push(bound);
            if empty {
                self.stats.pruned_no_candidate += 1;
                self.undo_refine(k, done + 1);
                return Err(conflict::no_candidate(bound));
            }
        }
        Ok(())
    }

    /// Pops the frames pushed by the first `count` later neighbors of `k`.
    fn undo_refine(&mut self, k: usize, count: usize) {
        let forward = self.gcs.forward(k);
        for &(j, _) in &forward[..count] {
            let f = self.frames[j].pop().unwrap();
            self.pool.push(f);
            self.bounds[j].pop();
        }
    }

    fn frame_contains(&self, j: usize, b: u32) -> bool {
        self.frames[j].last().unwrap().binary_search(&b).is_ok()
    }

    /// Fixed mask of a node whose frame of `j` lost `b`: the first earlier
    /// neighbor not adjacent to it, else the first matching edge nogood.
    fn removal_reason(&self, j: usize, b: u32) -> QuerySet {
        let gcs = self.gcs;
        let assigned = |p: usize| self.assign_idx[p] != NONE;
        for &p in gcs.backward(j) {
            if !assigned(p) {
                continue;
            }
            let edge = gcs.edge(gcs.edge_between(p, j).unwrap());
            if edge
                .targets(self.assign_idx[p] as usize)
                .binary_search(&b)
                .is_err()
            {
                return QuerySet::singleton(p);
            }
        }
        for &p in gcs.backward(j) {
            if !assigned(p) {
                continue;
            }
            let a = self.assign_idx[p] as usize;
            let edge = gcs.edge(gcs.edge_between(p, j).unwrap());
            let off = edge.targets(a).binary_search(&b).unwrap();
            if let Some(rec) = edge.ne_slot(a, off).and_then(|s| self.store.ne(s)) {
                if matches_record(rec, &self.anc, p) {
                    return rec.domain.with(p);
                }
            }
        }
        unreachable!("candidate {b} of position {j} left its frame without a cause")
    }

    /// Extends with the `a`-th candidate of `k` and searches below it. The second
    /// value is set for conflicts and tells whether to store them.
    fn try_child(&mut self, k: usize, a: usize, alive: &[u32]) -> (Outcome, Option<bool>) {
        let x = self.gcs.candidates(k)[a];
        if let Some((mask, record)) = self.vertex_conflict(k, a, x) {
            return (Outcome::Dead(mask), Some(record));
        }
        if let Err(mask) = self.refine(k, a) {
            return (Outcome::Dead(mask), Some(true));
        }
        self.assign_at(k, a as u32, x);
        if self.is_shallow(k) {
            self.steal.as_ref().unwrap().set_prefix(k, a as u32);
        }

        // Targets alive in the child.
        let mut child_alive = std::mem::take(&mut self.alive[k + 1]);
        child_alive.clear();
        for &tid in alive {
            let t = self.targets[tid as usize];
            if t.pos == k {
                continue;
            }
            if let Some(e) = self.gcs.edge_between(k, t.pos) {
                if !self.frame_contains(t.pos, t.cand) {
                    let edge = self.gcs.edge(e);
                    let m = match edge.targets(a).binary_search(&t.cand) {
                        Err(_) => QuerySet::singleton(k),
                        Ok(off) => {
                            let rec = edge
                                .ne_slot(a, off)
                                .and_then(|s| self.store.ne(s))
                                .expect("removed candidate edge has a matching nogood");
                            rec.domain.with(k)
                        }
                    };
                    self.fixed_out[tid as usize] = Fixed::Mask(m);
                    continue;
                }
            }
            child_alive.push(tid);
        }
        let first_own = self.targets.len();
        if self.cfg.use_ne {
            let gcs = self.gcs;
            for &(j, e) in gcs.forward(k) {
                let edge = gcs.edge(e);
                if !edge.in_two_core {
                    continue;
                }
                for (off, &b) in edge.targets(a).iter().enumerate() {
                    let tid = self.targets.len() as u32;
                    self.targets.push(Target {
                        pos: j,
                        cand: b,
                        slot: edge.ne_slot(a, off).unwrap(),
                        found: false,
                    });
                    if self.frame_contains(j, b) {
                        self.fixed_out.push(Fixed::Unknown);
                        child_alive.push(tid);
                    } else {
                        let m = self.removal_reason(j, b);
                        self.fixed_out.push(Fixed::Mask(m));
                    }
                }
            }
        }
        self.alive[k + 1] = child_alive;

        let out = self.visit(k + 1);

        if !self.aborted {
            for tid in first_own..self.targets.len() {
                let t = self.targets[tid];
                if t.found {
                    continue;
                }
                if let Fixed::Mask(m) = self.fixed_out[tid] {
                    let rec = encode_nogood(m.without(k), &self.anc);
                    self.store.record_ne(t.slot, rec);
                    self.stats.ne_records += 1;
                    let to = self.gcs.candidates(t.pos)[t.cand as usize];
                    self.obs.ne_recorded((k, x), (t.pos, to), &rec);
                }
            }
        }
        self.targets.truncate(first_own);
        self.fixed_out.truncate(first_own);
        self.unassign_at(k);
        self.undo_refine(k, self.gcs.forward(k).len());
        (out, None)
    }
}
