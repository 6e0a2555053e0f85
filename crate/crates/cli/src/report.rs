use std::fmt;
use std::time::Duration;

use guardmatch::{MatchConfig, MatchResult, MatchStats, Termination};
use serde::Serialize;

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub limit: Option<u64>,
    pub time_limit_sec: Option<f64>,
    pub reservation_size: usize,
    pub reservation: bool,
    pub nv: bool,
    pub ne: bool,
    pub backjump: bool,
    pub threads: usize,
    pub seed: u64,
}

impl From<&MatchConfig> for ConfigEcho {
    fn from(c: &MatchConfig) -> Self {
        ConfigEcho {
            limit: c.embedding_limit,
            time_limit_sec: c.time_limit.map(|d| d.as_secs_f64()),
            reservation_size: c.reservation_size,
            reservation: c.use_reservation,
            nv: c.use_nv,
            ne: c.use_ne,
            backjump: c.use_backjump,
            threads: c.threads,
            seed: c.seed,
        }
    }
}

#[derive(Serialize)]
pub struct Pruned {
    pub injectivity: u64,
    pub reservation: u64,
    pub nv: u64,
    pub ne: u64,
    pub no_candidate: u64,
}

impl From<&MatchStats> for Pruned {
    fn from(s: &MatchStats) -> Self {
        Pruned {
            injectivity: s.pruned_injectivity,
            reservation: s.pruned_reservation,
            nv: s.pruned_nv,
            ne: s.pruned_ne,
            no_candidate: s.pruned_no_candidate,
        }
    }
}

#[derive(Serialize)]
pub struct RunReport {
    pub data: String,
    pub query: String,
    pub config: ConfigEcho,
    pub embeddings: u64,
    pub termination: Termination,
    pub wall_ms: f64,
    pub search_ms: f64,
    pub filter_ms: f64,
    pub gcs_ms: f64,
    pub reservation_ms: f64,
    pub recursions: u64,
    pub pruned: Pruned,
    pub backjumps: u64,
    pub nv_records: u64,
    pub ne_records: u64,
    pub order: Vec<usize>,
}

impl RunReport {
    pub fn new(
        data: String,
        query: String,
        cfg: &MatchConfig,
        r: &MatchResult,
        wall: Duration,
    ) -> Self {
        RunReport {
            data,
            query,
            config: cfg.into(),
            embeddings: r.stats.embeddings,
            termination: r.stats.termination,
            wall_ms: ms(wall),
            search_ms: ms(r.search_time),
            filter_ms: ms(r.timings.filter),
            gcs_ms: ms(r.timings.gcs),
            reservation_ms: ms(r.timings.reservation),
            recursions: r.stats.recursions,
            pruned: (&r.stats).into(),
            backjumps: r.stats.backjumps,
            nv_records: r.stats.nv_records,
            ne_records: r.stats.ne_records,
            order: r.order.clone(),
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        let on = |b: bool| if b { "on" } else { "off" };
        writeln!(f, "data         {}", self.data)?;
        writeln!(f, "query        {}", self.query)?;
        writeln!(
            f,
            "config       limit {} r={} reservation {} nv {} ne {} backjump {} threads {}",
            c.limit.map_or("none".to_string(), |l| l.to_string()),
            c.reservation_size,
            on(c.reservation),
            on(c.nv),
            on(c.ne),
            on(c.backjump),
            c.threads
        )?;
        writeln!(f, "embeddings   {}", self.embeddings)?;
        writeln!(f, "termination  {}", self.termination.as_str())?;
        writeln!(f, "recursions   {}", self.recursions)?;
        let p = &self.pruned;
        writeln!(
            f,
            "pruned       injectivity {} reservation {} nv {} ne {} no-candidate {}",
            p.injectivity, p.reservation, p.nv, p.ne, p.no_candidate
        )?;
        writeln!(f, "backjumps    {}", self.backjumps)?;
        writeln!(
            f,
            "records      nv {} ne {}",
            self.nv_records, self.ne_records
        )?;
        writeln!(
            f,
            "time (ms)    total {:.3} filter {:.3} gcs {:.3} reservation {:.3} search {:.3}",
            self.wall_ms, self.filter_ms, self.gcs_ms, self.reservation_ms, self.search_ms
        )?;
        write!(f, "order        {:?}", self.order)
    }
}
