//! Rate sweep with one task per grid point, merged by grid index.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sdnop_core::diagnostics::{fit_rate, prepare_sweep, rate_point, RateFit, RatePoint, RateSweepConfig};
use sdnop_core::problem::{KktPoint, ProblemOracle};

pub fn parallel_rate_sweep<P: ProblemOracle + Sync + ?Sized>(
    p: &P,
    reference: &KktPoint,
    cfg: &RateSweepConfig,
    threads: usize,
) -> sdnop_core::Result<RateFit> {
    let (u, verified) = prepare_sweep(p, reference, cfg)?;
    let k = cfg.grid.len();
    let workers = match threads {
        0 => std::thread::available_parallelism().map_or(1, |v| v.get()),
        t => t,
    }
    .clamp(1, k);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<sdnop_core::Result<RatePoint>>>> = (0..k).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= k {
                    break;
                }
                let r = rate_point(p, reference, cfg.grid[i], &u, cfg);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    let points = slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every grid point is visited"))
        .collect::<sdnop_core::Result<Vec<_>>>()?;
    Ok(fit_rate(points, verified))
}
