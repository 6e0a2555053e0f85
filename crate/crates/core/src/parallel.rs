//! Work-stealing driver. Each worker owns its search state and nogood store;
//! idle workers take the upper half of the untried candidates of the shallowest
//! splittable frame of another worker and replay its prefix.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::graph::VertexId;
use crate::search::{Control, MatchConfig, MatchResult, MatchStats, Plan, Worker};

/// Frames with fewer untried candidates are never split.
pub(crate) const SHARE_MIN_CANDIDATES: usize = 4;

struct SharedFrame {
    depth: usize,
    list: Vec<u32>,
    next: usize,
    end: usize,
    split: bool,
}

struct Slot {
    frames: Vec<SharedFrame>,
    prefix: Vec<u32>,
}

pub(crate) struct Shared {
    slots: Vec<Mutex<Slot>>,
    busy: AtomicUsize,
}

pub(crate) struct Task {
    prefix: Vec<u32>,
    list: Vec<u32>,
}

#[derive(Clone, Copy)]
pub(crate) struct StealHandle<'a> {
    shared: &'a Shared,
    me: usize,
}

impl StealHandle<'_> {
    fn slot(&self) -> std::sync::MutexGuard<'_, Slot> {
        self.shared.slots[self.me].lock().unwrap()
    }

    pub(crate) fn publish(&self, depth: usize, list: &[u32]) {
        self.slot().frames.push(SharedFrame {
            depth,
            list: list.to_vec(),
            next: 0,
            end: list.len(),
            split: false,
        });
    }

    /// Next untried index of the innermost published frame.
    pub(crate) fn claim(&self) -> Option<usize> {
        let mut s = self.slot();
        let f = s.frames.last_mut().unwrap();
        if f.next < f.end {
            f.next += 1;
            Some(f.next - 1)
        } else {
            None
        }
    }

    /// Withdraws the innermost frame; true when part of it was stolen.
    pub(crate) fn unpublish(&self) -> bool {
        self.slot().frames.pop().unwrap().split
    }

    pub(crate) fn set_prefix(&self, p: usize, a: u32) {
        self.slot().prefix[p] = a;
    }

    fn steal(&self) -> Option<Task> {
        let t = self.shared.slots.len();
        for off in 1..t {
            let victim = (self.me + off) % t;
            let Ok(mut guard) = self.shared.slots[victim].try_lock() else {
                continue;
            };
            let slot = &mut *guard;
            for f in slot.frames.iter_mut() {
                if f.end - f.next >= SHARE_MIN_CANDIDATES {
                    let mid = f.next + (f.end - f.next) / 2;
                    let list = f.list[mid..f.end].to_vec();
                    f.end = mid;
                    f.split = true;
                    self.shared.busy.fetch_add(1, Ordering::SeqCst);
                    return Some(Task {
                        prefix: slot.prefix[..f.depth].to_vec(),
                        list,
                    });
                }
            }
        }
        None
    }
}

pub(crate) fn run_parallel(plan: &Plan, cfg: &MatchConfig) -> MatchResult {
    let start = Instant::now();
    let gcs = plan.gcs();
    let ctl = Control::new(cfg);
    let threads = cfg.threads;
    let shared = Shared {
        slots: (0..threads)
            .map(|_| {
                Mutex::new(Slot {
                    frames: Vec::new(),
                    prefix: vec![u32::MAX; gcs.query_size()],
                })
            })
            .collect(),
        busy: AtomicUsize::new(1),
    };

    let results: Vec<(MatchStats, Vec<Vec<VertexId>>)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|me| {
                let shared = &shared;
                let ctl = &ctl;
                s.spawn(move || {
                    let handle = StealHandle { shared, me };
                    let mut obs = ();
                    let mut w = Worker::new(gcs, cfg, ctl, &mut obs, me, Some(handle));
                    if me == 0 {
                        w.run_root();
                        shared.busy.fetch_sub(1, Ordering::SeqCst);
                    }
                    let mut idle = 0u32;
                    while !ctl.stopped() {
                        match handle.steal() {
                            Some(task) => {
                                idle = 0;
                                w.run_task(&task.prefix, task.list);
                                shared.busy.fetch_sub(1, Ordering::SeqCst);
                            }
                            None => {
                                if shared.busy.load(Ordering::SeqCst) == 0 {
                                    break;
                                }
                                idle += 1;
                                if idle < 64 {
                                    std::thread::yield_now();
                                } else {
                                    let shift = (idle - 64).min(5);
                                    std::thread::sleep(Duration::from_micros(50 << shift));
                                }
                            }
                        }
                    }
                    (w.stats.clone(), std::mem::take(&mut w.embeddings))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut stats = MatchStats::default();
    let mut embeddings = Vec::new();
    for (st, mut e) in results {
        stats.merge(&st);
        embeddings.append(&mut e);
    }
    stats.termination = ctl.termination();
    MatchResult {
        embeddings,
        stats,
        order: gcs.order().as_slice().to_vec(),
        timings: plan.timings(),
        search_time: start.elapsed(),
    }
}
