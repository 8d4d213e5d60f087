//! Detour sweeps: extra path length in either arm shifts the detection times
//! until the pair passes from time-like (photon 1 first) through space-like to
//! time-like (photon 2 first).

use rayon::prelude::*;

use super::{run, ExperimentConfig, Geometry, OrderClass};
use crate::error::{Error, Result};
use crate::ftl::Arrival;
use crate::scalar::Scalar;

/// Extra path length of an isosceles bump of height `height` over a straight run of length `base`.
pub fn detour_added_length<T: Scalar>(base: T, height: T) -> T {
    let half = base * T::half();
    T::two() * half.hypot(height) - base
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub delta_left: T,
    pub delta_right: T,
    pub order_class: OrderClass,
    pub correlated: bool,
    pub s2: T,
    pub t1_s: T,
    pub t2_s: T,
    /// Arrival time of the front at the partner, preferred frame.
    pub tf_s: Option<T>,
}

/// Change of order class between neighbouring left-detour values at fixed right detour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderTransition<T> {
    pub delta_right: T,
    pub left_before: T,
    pub left_after: T,
    pub from: OrderClass,
    pub to: OrderClass,
}

/// Sweep result. Rows are ordered left-grid major, right-grid minor.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable<T> {
    pub left_grid: Vec<T>,
    pub right_grid: Vec<T>,
    pub rows: Vec<SweepRow<T>>,
    pub transitions: Vec<OrderTransition<T>>,
}

impl<T: Scalar> SweepTable<T> {
    pub fn row(&self, left_index: usize, right_index: usize) -> &SweepRow<T> {
        &self.rows[left_index * self.right_grid.len() + right_index]
    }
}

/// Runs the base experiment for every `(Δ_left, Δ_right)` pair.
///
/// The base must be collinear or detoured; its arm lengths are kept and its
/// detours replaced. Cells are evaluated in parallel and assembled in grid order.
pub fn detour_sweep<T: Scalar>(
    base: &ExperimentConfig<T>,
    left_grid: &[T],
    right_grid: &[T],
) -> Result<SweepTable<T>> {
    if left_grid.is_empty() || right_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (l1, l2) = match base.geometry {
        Geometry::Collinear { l1, l2 } | Geometry::Detoured { l1, l2, .. } => (l1, l2),
        Geometry::Transverse { .. } => {
            return Err(Error::Unsupported("detour sweeps need a collinear base geometry".into()))
        }
    };
    base.validate()?;

    let cells: Vec<(T, T)> = left_grid
        .iter()
        .flat_map(|&dl| right_grid.iter().map(move |&dr| (dl, dr)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(delta_left, delta_right)| {
            let cfg = ExperimentConfig {
                geometry: Geometry::Detoured { l1, l2, left_extra: delta_left, right_extra: delta_right },
                ..*base
            };
            let o = run(&cfg)?;
            Ok(SweepRow {
                delta_left,
                delta_right,
                order_class: o.order_class,
                correlated: o.correlated,
                s2: o.pair_interval.s2,
                t1_s: o.detection1.preferred.t,
                t2_s: o.detection2.preferred.t,
                tf_s: match o.ftl_arrival {
                    Arrival::At(a) => Some(a.t),
                    Arrival::NoArrival => None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nr = right_grid.len();
    let mut transitions = Vec::new();
    for (j, &delta_right) in right_grid.iter().enumerate() {
        for i in 1..left_grid.len() {
            let (a, b) = (&rows[(i - 1) * nr + j], &rows[i * nr + j]);
            if a.order_class != b.order_class {
                transitions.push(OrderTransition {
                    delta_right,
                    left_before: a.delta_left,
                    left_after: b.delta_left,
                    from: a.order_class,
                    to: b.order_class,
                });
            }
        }
    }

    Ok(SweepTable { left_grid: left_grid.to_vec(), right_grid: right_grid.to_vec(), rows, transitions })
}
