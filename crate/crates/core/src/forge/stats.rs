use serde::{Deserialize, Serialize};

pub const STAGES: [&str; 3] = ["initial", "logic", "syntax"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub valid_count: usize,
    pub accuracy_pct: f64,
}

/// Valid (executable and gold-consistent) query counts after each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stages: Vec<StageCount>,
    pub total_source_count: usize,
}

pub fn pct(valid: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        valid as f64 / total as f64 * 100.0
    }
}

impl StageStats {
    pub fn from_counts(valid: [usize; 3], total: usize) -> StageStats {
        let stages = STAGES
            .iter()
            .zip(valid)
            .map(|(s, v)| StageCount {
                stage: s.to_string(),
                valid_count: v,
                accuracy_pct: pct(v, total),
            })
            .collect();
        StageStats {
            stages,
            total_source_count: total,
        }
    }

    pub fn valid(&self, stage: &str) -> Option<usize> {
        self.stages
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| s.valid_count)
    }

    pub fn is_monotone(&self) -> bool {
        self.stages
            .windows(2)
            .all(|w| w[0].valid_count <= w[1].valid_count)
    }

    /// Sums two partial runs over disjoint records.
    pub fn merge(&self, other: &StageStats) -> StageStats {
        let total = self.total_source_count + other.total_source_count;
        let stages = self
            .stages
            .iter()
            .zip(&other.stages)
            .map(|(a, b)| {
                let v = a.valid_count + b.valid_count;
                StageCount {
                    stage: a.stage.clone(),
                    valid_count: v,
                    accuracy_pct: pct(v, total),
                }
            })
            .collect();
        StageStats {
            stages,
            total_source_count: total,
        }
    }
}
