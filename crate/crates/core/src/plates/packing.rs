//! Greedy dart-throwing circle packing inside the unit disk.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PlateError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingParams {
    pub r_min: f64,
    pub r_max: f64,
    /// Minimum clear gap between neighbouring circles.
    pub g_min: f64,
    pub n_max: usize,
    /// Stop after this many consecutive rejected darts.
    pub max_failures: usize,
}

impl Default for PackingParams {
    fn default() -> Self {
        PackingParams {
            r_min: 0.012,
            r_max: 0.035,
            g_min: 0.004,
            n_max: 3000,
            max_failures: 4000,
        }
    }
}

impl PackingParams {
    pub fn validate(&self) -> Result<(), PlateError> {
        let in_range = |r: f64| r > 0.0 && r <= 0.1;
        if !in_range(self.r_min) || !in_range(self.r_max) || self.r_min > self.r_max {
            return Err(PlateError::Parameter(format!(
                "radii must satisfy 0 < r_min <= r_max <= 0.1, got {} and {}",
                self.r_min, self.r_max
            )));
        }
        if !(self.g_min >= 0.0 && self.g_min.is_finite()) {
            return Err(PlateError::Parameter(format!("bad gap {}", self.g_min)));
        }
        if self.max_failures == 0 {
            return Err(PlateError::Parameter("max_failures must be at least 1".into()));
        }
        Ok(())
    }
}

/// An uncolored circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    pub disks: Vec<Disk>,
    /// Covered area over the unit disk area.
    pub fill_fraction: f64,
}

struct Grid {
    cell: f64,
    cols: usize,
    buckets: Vec<Vec<usize>>,
}

impl Grid {
    fn new(cell: f64) -> Self {
        let cols = (2.0 / cell).ceil() as usize + 1;
        Grid {
            cell,
            cols,
            buckets: vec![Vec::new(); cols * cols],
        }
    }

    fn index(&self, v: f64) -> usize {
        (((v + 1.0) / self.cell).floor().max(0.0) as usize).min(self.cols - 1)
    }

    fn insert(&mut self, x: f64, y: f64, id: usize) {
        let (i, j) = (self.index(x), self.index(y));
        self.buckets[j * self.cols + i].push(id);
    }

    fn neighbours(&self, x: f64, y: f64) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (self.index(x) as isize, self.index(y) as isize);
        let cols = self.cols as isize;
        (j - 1..=j + 1)
            .flat_map(move |jj| (i - 1..=i + 1).map(move |ii| (ii, jj)))
            .filter(move |&(ii, jj)| ii >= 0 && jj >= 0 && ii < cols && jj < cols)
            .flat_map(move |(ii, jj)| self.buckets[(jj * cols + ii) as usize].iter().copied())
    }
}

/// Throws darts uniformly over the disk. Each dart draws a radius in
/// `[r_min, r_max]` and shrinks it to the free space around its center; the dart
/// is rejected when less than `r_min` is free.
pub fn pack_disk(seed: u64, params: &PackingParams) -> Result<Packing, PlateError> {
    params.validate()?;
    let mut rng = rng::seeded(seed);
    // any circle that can touch a new one lies within 2 r_max + g_min
    let mut grid = Grid::new(2.0 * params.r_max + params.g_min);
    let mut disks: Vec<Disk> = Vec::new();
    let mut failures = 0;
    while failures < params.max_failures && disks.len() < params.n_max {
        let rho = rng.random::<f64>().sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let (x, y) = (rho * theta.cos(), rho * theta.sin());
        let wanted = rng.random_range(params.r_min..=params.r_max);
        let mut free = 1.0 - rho;
        for id in grid.neighbours(x, y) {
            let d = &disks[id];
            let dist = ((d.cx - x).powi(2) + (d.cy - y).powi(2)).sqrt();
            free = free.min(dist - d.radius - params.g_min);
        }
        if free < params.r_min {
            failures += 1;
            continue;
        }
        failures = 0;
        grid.insert(x, y, disks.len());
        disks.push(Disk {
            cx: x,
            cy: y,
            radius: wanted.min(free),
        });
    }
    let area: f64 = disks.iter().map(|d| d.radius * d.radius).sum();
    Ok(Packing {
        fill_fraction: area,
        disks,
    })
}
