//! Cycle accounting for the streaming detector datapath.
//!
//! Three units run per window: the cell unit (gradients, CORDIC and binning
//! for one 8x8 cell), the block normalization unit and the SVM MAC. Per-unit
//! budgets are parameters; the model composes them either strictly in
//! sequence or with the cell and normalization units overlapped as a two-stage
//! pipeline. All counts are exact integers; only the final time conversion
//! divides by the clock.

use std::fmt;

use crate::descriptor::HogGeometry;

/// Published timings at 50 MHz, in seconds.
pub const PAPER_EXTRACT_TIME_S: f64 = 0.411e-3;
pub const PAPER_DETECT_TIME_S: f64 = 0.757e-3;
pub const PAPER_CLOCK_HZ: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapMode {
    /// Cell stage, then normalization stage, then SVM.
    #[default]
    Sequential,
    /// Normalization of a block starts as soon as its four cells exist and
    /// the normalization unit is free; SVM still follows extraction.
    CellNormOverlapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclePlan {
    pub cycles_per_cell: u64,
    pub cycles_per_block_norm: u64,
    pub cycles_per_mac: u64,
    pub svm_pipeline_fill: u64,
    pub clock_hz: u64,
    pub overlap_mode: OverlapMode,
}

impl Default for CyclePlan {
    fn default() -> Self {
        Self {
            cycles_per_cell: 108,
            cycles_per_block_norm: 47,
            cycles_per_mac: 1,
            svm_pipeline_fill: 0,
            clock_hz: PAPER_CLOCK_HZ,
            overlap_mode: OverlapMode::Sequential,
        }
    }
}

impl CyclePlan {
    /// Plan with every per-unit cost set to zero.
    pub fn zero_cost() -> Self {
        Self {
            cycles_per_cell: 0,
            cycles_per_block_norm: 0,
            cycles_per_mac: 0,
            svm_pipeline_fill: 0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleReport {
    pub cell_stage_cycles: u64,
    pub norm_stage_cycles: u64,
    pub svm_stage_cycles: u64,
    /// Cycles spent after the longer of the cell/norm stages finishes (zero in
    /// sequential mode).
    pub drain_cycles: u64,
    pub total_extract_cycles: u64,
    pub total_detect_cycles: u64,
    pub clock_hz: u64,
    pub extract_time_s: f64,
    pub detect_time_s: f64,
    pub overlap_mode: OverlapMode,
}

impl CycleReport {
    pub fn svm_time_s(&self) -> f64 {
        self.svm_stage_cycles as f64 / self.clock_hz as f64
    }

    /// `key=value` lines for scripting.
    pub fn to_key_values(&self) -> String {
        let mode = match self.overlap_mode {
            OverlapMode::Sequential => "sequential",
            OverlapMode::CellNormOverlapped => "overlapped",
        };
        format!(
            "overlap_mode={mode}\nclock_hz={}\ncell_stage_cycles={}\nnorm_stage_cycles={}\nsvm_stage_cycles={}\ndrain_cycles={}\ntotal_extract_cycles={}\ntotal_detect_cycles={}\nextract_time_s={:e}\ndetect_time_s={:e}\n",
            self.clock_hz,
            self.cell_stage_cycles,
            self.norm_stage_cycles,
            self.svm_stage_cycles,
            self.drain_cycles,
            self.total_extract_cycles,
            self.total_detect_cycles,
            self.extract_time_s,
            self.detect_time_s,
        )
    }
}

impl fmt::Display for CycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<24}{:>12}", "stage", "cycles")?;
        writeln!(f, "{:<24}{:>12}", "cell histograms", self.cell_stage_cycles)?;
        writeln!(f, "{:<24}{:>12}", "block normalization", self.norm_stage_cycles)?;
        if self.drain_cycles > 0 {
            writeln!(f, "{:<24}{:>12}", "pipeline drain", self.drain_cycles)?;
        }
        writeln!(f, "{:<24}{:>12}", "extract total", self.total_extract_cycles)?;
        writeln!(f, "{:<24}{:>12}", "svm", self.svm_stage_cycles)?;
        writeln!(f, "{:<24}{:>12}", "detect total", self.total_detect_cycles)?;
        writeln!(
            f,
            "at {} Hz: extract {:.6} ms, detect {:.6} ms",
            self.clock_hz,
            self.extract_time_s * 1e3,
            self.detect_time_s * 1e3
        )
    }
}

/// Completion cycle of the normalization unit when it consumes blocks in
/// raster order as soon as their cells are done.
fn overlapped_extract_cycles(geom: &HogGeometry, plan: &CyclePlan) -> u64 {
    let cx = geom.cells_x() as u64;
    let cell_stage = geom.cell_count() as u64 * plan.cycles_per_cell;
    let mut unit_free = 0u64;
    for by in 0..geom.blocks_y() as u64 {
        for bx in 0..geom.blocks_x() as u64 {
            // last cell of block (bx, by) is (bx + 1, by + 1)
            let ready = ((by + 1) * cx + bx + 2) * plan.cycles_per_cell;
            unit_free = ready.max(unit_free) + plan.cycles_per_block_norm;
        }
    }
    unit_free.max(cell_stage)
}

pub fn estimate(geom: &HogGeometry, plan: &CyclePlan) -> CycleReport {
    let cell_stage = geom.cell_count() as u64 * plan.cycles_per_cell;
    let norm_stage = geom.block_count() as u64 * plan.cycles_per_block_norm;
    let svm_stage = geom.descriptor_len() as u64 * plan.cycles_per_mac + plan.svm_pipeline_fill;

    let (extract, drain) = match plan.overlap_mode {
        OverlapMode::Sequential => (cell_stage + norm_stage, 0),
        OverlapMode::CellNormOverlapped => {
            let total = overlapped_extract_cycles(geom, plan);
            (total, total - cell_stage.max(norm_stage))
        }
    };
    let detect = extract + svm_stage;
    let hz = plan.clock_hz as f64;
    CycleReport {
        cell_stage_cycles: cell_stage,
        norm_stage_cycles: norm_stage,
        svm_stage_cycles: svm_stage,
        drain_cycles: drain,
        total_extract_cycles: extract,
        total_detect_cycles: detect,
        clock_hz: plan.clock_hz,
        extract_time_s: extract as f64 / hz,
        detect_time_s: detect as f64 / hz,
        overlap_mode: plan.overlap_mode,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub name: &'static str,
    pub paper_s: f64,
    pub modeled_s: f64,
    /// `(modeled - published) / published`.
    pub relative_diff: f64,
}

impl ComparisonRow {
    fn new(name: &'static str, paper_s: f64, modeled_s: f64) -> Self {
        Self {
            name,
            paper_s,
            modeled_s,
            relative_diff: (modeled_s - paper_s) / paper_s,
        }
    }
}

/// Modeled times next to the published ones.
///
/// Detection is read two ways: as a total that includes extraction, and as
/// the classification-only remainder `0.757 - 0.411` ms.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperComparison {
    pub extract: ComparisonRow,
    pub detect_total: ComparisonRow,
    pub classify_only: ComparisonRow,
}

impl PaperComparison {
    pub fn rows(&self) -> [&ComparisonRow; 3] {
        [&self.extract, &self.detect_total, &self.classify_only]
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (key, row) in [
            ("extract", &self.extract),
            ("detect_total", &self.detect_total),
            ("classify_only", &self.classify_only),
        ] {
            out.push_str(&format!(
                "{key}.paper_s={:e}\n{key}.modeled_s={:e}\n{key}.relative_diff={:.6}\n",
                row.paper_s, row.modeled_s, row.relative_diff
            ));
        }
        out
    }
}

impl fmt::Display for PaperComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<32}{:>12}{:>12}{:>10}", "timing", "published", "modeled", "diff")?;
        for row in self.rows() {
            writeln!(
                f,
                "{:<32}{:>9.3} ms{:>9.3} ms{:>+9.2}%",
                row.name,
                row.paper_s * 1e3,
                row.modeled_s * 1e3,
                row.relative_diff * 100.0
            )?;
        }
        Ok(())
    }
}

pub fn compare_to_paper(report: &CycleReport) -> PaperComparison {
    PaperComparison {
        extract: ComparisonRow::new("extract", PAPER_EXTRACT_TIME_S, report.extract_time_s),
        detect_total: ComparisonRow::new(
            "detect (including extraction)",
            PAPER_DETECT_TIME_S,
            report.detect_time_s,
        ),
        classify_only: ComparisonRow::new(
            "detect minus extract",
            PAPER_DETECT_TIME_S - PAPER_EXTRACT_TIME_S,
            report.svm_time_s(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_sequential_counts() {
        let r = estimate(&HogGeometry::standard(), &CyclePlan::default());
        assert_eq!(r.cell_stage_cycles, 13_824);
        assert_eq!(r.norm_stage_cycles, 4_935);
        assert_eq!(r.svm_stage_cycles, 3_780);
        assert_eq!(r.total_extract_cycles, 18_759);
        assert_eq!(r.total_detect_cycles, 22_539);
        assert_eq!(r.extract_time_s, 18_759.0 / 50e6);
        assert!((r.extract_time_s - 0.375e-3).abs() < 1e-6);
    }

    #[test]
    fn zero_cost_plan() {
        let r = estimate(&HogGeometry::standard(), &CyclePlan::zero_cost());
        assert_eq!(
            (
                r.cell_stage_cycles,
                r.norm_stage_cycles,
                r.svm_stage_cycles,
                r.total_detect_cycles
            ),
            (0, 0, 0, 0)
        );
        assert_eq!(r.detect_time_s, 0.0);
        let c = compare_to_paper(&r);
        assert!(c.rows().iter().all(|row| row.relative_diff == -1.0));
        let r = estimate(
            &HogGeometry::standard(),
            &CyclePlan {
                overlap_mode: OverlapMode::CellNormOverlapped,
                ..CyclePlan::zero_cost()
            },
        );
        assert_eq!(r.total_detect_cycles, 0);
    }

    #[test]
    fn tuned_plan_hits_published_detect_time() {
        // 37,850 cycles = 0.757 ms at 50 MHz
        let plan = CyclePlan {
            cycles_per_mac: 5,
            svm_pipeline_fill: 191,
            ..CyclePlan::default()
        };
        let r = estimate(&HogGeometry::standard(), &plan);
        assert_eq!(r.total_detect_cycles, 37_850);
        let c = compare_to_paper(&r);
        assert!(c.detect_total.relative_diff.abs() < 1e-12);
    }

    #[test]
    fn overlapped_default() {
        let plan = CyclePlan {
            overlap_mode: OverlapMode::CellNormOverlapped,
            ..CyclePlan::default()
        };
        let r = estimate(&HogGeometry::standard(), &plan);
        // cell-bound: the last block (6, 14) waits for the final cell, then
        // takes one normalization slot
        assert_eq!(r.total_extract_cycles, 13_824 + 47);
        assert_eq!(r.drain_cycles, 47);
    }

    #[test]
    fn norm_bound_overlap_pays_pipeline_fill() {
        let plan = CyclePlan {
            cycles_per_cell: 1,
            cycles_per_block_norm: 100,
            overlap_mode: OverlapMode::CellNormOverlapped,
            ..CyclePlan::default()
        };
        let r = estimate(&HogGeometry::standard(), &plan);
        // first block needs cells_x + 2 = 10 cells before it can start
        assert_eq!(r.total_extract_cycles, 10 + 105 * 100);
    }

    #[test]
    fn report_formats() {
        let r = estimate(&HogGeometry::standard(), &CyclePlan::default());
        let kv = r.to_key_values();
        assert!(kv.contains("cell_stage_cycles=13824\n"));
        assert!(kv.contains("norm_stage_cycles=4935\n"));
        let table = r.to_string();
        assert!(table.contains("13824"));
        let c = compare_to_paper(&r).to_string();
        assert!(c.contains("0.411") && c.contains("0.757"));
    }

    proptest! {
        #[test]
        fn plan_properties(cpc in 0u64..500, cpn in 0u64..500, mac in 0u64..8, fill in 0u64..1000, hz in 1u64..1_000_000_000) {
            let g = HogGeometry::standard();
            let seq = CyclePlan { cycles_per_cell: cpc, cycles_per_block_norm: cpn, cycles_per_mac: mac, svm_pipeline_fill: fill, clock_hz: hz, overlap_mode: OverlapMode::Sequential };
            let ovl = CyclePlan { overlap_mode: OverlapMode::CellNormOverlapped, ..seq };
            let (rs, ro) = (estimate(&g, &seq), estimate(&g, &ovl));
            prop_assert_eq!(rs.total_extract_cycles, rs.cell_stage_cycles + rs.norm_stage_cycles);
            prop_assert!(ro.total_detect_cycles <= rs.total_detect_cycles);
            prop_assert!(ro.total_extract_cycles >= rs.cell_stage_cycles.max(rs.norm_stage_cycles));

            let fast = estimate(&g, &CyclePlan { clock_hz: hz * 2, ..seq });
            prop_assert_eq!(fast.total_detect_cycles, rs.total_detect_cycles);
            prop_assert_eq!(fast.detect_time_s, rs.detect_time_s / 2.0);
            prop_assert_eq!(fast.extract_time_s, rs.extract_time_s / 2.0);
        }
    }
}
