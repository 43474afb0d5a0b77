//! Adjacency heatmaps as binary PGM images with max-pooled downsampling and
//! optional class/group boundary lines from a partition plan.

use crate::partition::PartitionPlan;
use crate::sparse::SparseMatrix;

pub const CLASS_BOUNDARY_GRAY: u8 = 128;
pub const GROUP_BOUNDARY_GRAY: u8 = 0;
pub const NONZERO_GRAY: u8 = 0;
pub const BACKGROUND_GRAY: u8 = 255;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Pgm {
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.pixels[r * self.width + c]
    }

    /// Binary P5 encoding.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Renders the nonzero pattern: side = min(dim, max_side) per axis, each
/// pixel dark if any nonzero pools into it. When a plan is given, class
/// boundaries are drawn mid-gray and group boundaries black.
pub fn render_heatmap(
    m: &SparseMatrix,
    plan: Option<&PartitionPlan>,
    max_side: usize,
) -> Pgm {
    let height = m.rows().min(max_side).max(1);
    let width = m.cols().min(max_side).max(1);
    let mut pixels = vec![BACKGROUND_GRAY; width * height];
    let pool_r = |r: usize| r * height / m.rows().max(1);
    let pool_c = |c: usize| c * width / m.cols().max(1);
    m.for_each_entry(|r, c, _| {
        pixels[pool_r(r) * width + pool_c(c)] = NONZERO_GRAY;
    });
    if let Some(plan) = plan {
        let (class_bounds, group_bounds) = plan.layout_boundaries();
        let mut draw_line = |pos: usize, shade: u8| {
            let pr = pool_r(pos.min(m.rows().saturating_sub(1)));
            let pc = pool_c(pos.min(m.cols().saturating_sub(1)));
            for c in 0..width {
                let px = &mut pixels[pr * width + c];
                *px = (*px).min(shade);
            }
            for r in 0..height {
                let px = &mut pixels[r * width + pc];
                *px = (*px).min(shade);
            }
        };
        for &pos in &class_bounds {
            draw_line(pos, CLASS_BOUNDARY_GRAY);
        }
        for &pos in &group_bounds {
            draw_line(pos, GROUP_BOUNDARY_GRAY);
        }
    }
    Pgm {
        width,
        height,
        pixels,
    }
}

/// Fraction of dark pixels inside the plan's diagonal block squares vs
/// outside; used to check that restructuring concentrates mass on the
/// diagonal.
pub fn block_pixel_density(pgm: &Pgm, m: &SparseMatrix, plan: &PartitionPlan) -> (f64, f64) {
    let pool = |x: usize, dim: usize, side: usize| x * side / dim.max(1);
    let mut in_block = vec![false; pgm.width * pgm.height];
    for &(lo, hi) in &plan.block_ranges {
        if lo >= hi {
            continue;
        }
        let (r0, r1) = (
            pool(lo, m.rows(), pgm.height),
            pool(hi - 1, m.rows(), pgm.height),
        );
        let (c0, c1) = (
            pool(lo, m.cols(), pgm.width),
            pool(hi - 1, m.cols(), pgm.width),
        );
        for r in r0..=r1 {
            for c in c0..=c1 {
                in_block[r * pgm.width + c] = true;
            }
        }
    }
    let mut dark_in = 0usize;
    let mut area_in = 0usize;
    let mut dark_out = 0usize;
    let mut area_out = 0usize;
    for (i, &flag) in in_block.iter().enumerate() {
        let dark = pgm.pixels[i] == NONZERO_GRAY;
        if flag {
            area_in += 1;
            dark_in += usize::from(dark);
        } else {
            area_out += 1;
            dark_out += usize::from(dark);
        }
    }
    (
        dark_in as f64 / area_in.max(1) as f64,
        dark_out as f64 / area_out.max(1) as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synth_power_law;
    use crate::sparsify::{restructure_pipeline, SparsifyConfig};

    #[test]
    fn identity_two_by_two() {
        let m = SparseMatrix::from_triples(2, 2, vec![(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let pgm = render_heatmap(&m, None, 1024);
        assert_eq!((pgm.width, pgm.height), (2, 2));
        assert_eq!(pgm.pixels, vec![0, 255, 255, 0]);
        let bytes = pgm.encode();
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(bytes.len(), b"P5\n2 2\n255\n".len() + 4);
    }

    #[test]
    fn downsampling_pools_nonzeros() {
        let m = SparseMatrix::from_triples(100, 100, vec![(99, 99, 1.0)]).unwrap();
        let pgm = render_heatmap(&m, None, 10);
        assert_eq!((pgm.width, pgm.height), (10, 10));
        assert_eq!(pgm.get(9, 9), NONZERO_GRAY);
        assert_eq!(pgm.pixels.iter().filter(|&&p| p == 0).count(), 1);
    }

    #[test]
    fn restructured_heatmap_concentrates_on_blocks() {
        let g = synth_power_law(512, 4, 7).unwrap();
        let cfg = SparsifyConfig {
            target_prune_ratio: 0.05,
            eta: 10,
            ..SparsifyConfig::default()
        };
        let outcome = restructure_pipeline(&g, 2, 8, 2, &cfg).unwrap();
        let pgm = render_heatmap(&outcome.a_final, Some(&outcome.plan), 256);
        let (inside, outside) = block_pixel_density(&pgm, &outcome.a_final, &outcome.plan);
        assert!(
            inside > outside,
            "expected diagonal concentration, got {inside} vs {outside}"
        );
    }
}
