use serde::Serialize;

/// One EM iterate: `(t, ‖θₜ‖, σₜ², KLₜ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub t: usize,
    pub theta_norm: f64,
    pub sigma_sq: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceContext {
    Population { d: usize, p: f64 },
    Sample { n: usize, d: usize, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmTrace {
    pub context: TraceContext,
    pub entries: Vec<TraceEntry>,
}

impl EmTrace {
    pub fn new(context: TraceContext) -> Self {
        Self {
            context,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: TraceEntry) {
        self.entries.push(entry);
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    pub fn first(&self) -> Option<&TraceEntry> {
        self.entries.first()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kl(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.kl)
    }

    /// Successive ratios `KLₜ₊₁ / KLₜ`, skipping steps that start below `floor`.
    pub fn kl_ratios(&self, floor: f64) -> Vec<f64> {
        self.entries
            .windows(2)
            .filter(|w| w[0].kl >= floor)
            .map(|w| w[1].kl / w[0].kl)
            .collect()
    }
}
