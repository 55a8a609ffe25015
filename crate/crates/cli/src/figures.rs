//! Parameter sweeps behind the figure subcommands.

use std::path::Path;

use effham_core::apps::dispersive::{first_zero, zeta_numeric_chain};
use effham_core::apps::near_resonant::cz_sweep_point;
use effham_core::apps::{
    cross_resonance::cr_point, dispersive::dispersive_point, zeta4, zero_circle_residual, DispersiveParams,
};
use effham_core::cqed::{CqedParams, Levels};
use rayon::prelude::*;

use crate::config::{load_params, pick_grids, Grid};
use crate::error::{CliError, CliResult};
use crate::svg::{heatmap, line_plot, Series};
use crate::table::{masked, Table};
use crate::Common;

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn series<'a>(t: &Table, x: &str, names: &[&'a str]) -> Vec<Series<'a>> {
    let xs = t.column(x).unwrap_or_default();
    names
        .iter()
        .filter_map(|&n| {
            let ys = t.column(n)?;
            Some(Series {
                name: n,
                points: xs.iter().copied().zip(ys).collect(),
            })
        })
        .collect()
}

pub fn fig3_defaults() -> CqedParams {
    let g = 2f64.sqrt() * 0.1;
    CqedParams {
        alpha1: -0.3,
        alpha2: -0.3,
        g1: g,
        g2: g,
        levels: Levels::Uniform(3),
        ..CqedParams::default()
    }
}

/// Relative errors of the near-resonant estimates across the avoided
/// crossing. Errors are NaN where a bare-level swap flips a rotation.
pub fn fig3(c: &Common) -> CliResult<Table> {
    let p = load_params(c.config.as_deref(), fig3_defaults(), c.levels)?;
    let [grid] = <[Grid; 1]>::try_from(pick_grids(&c.grids, &[Grid::new("detuning", -1.0, 1.2, 441)])?)
        .expect("one grid");
    let points = grid
        .points()
        .par_iter()
        .map(|&x| cz_sweep_point(x, p.alpha1, p.alpha2, p.g1, p.g2))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new([
        "detuning",
        "numeric",
        "two_rotation",
        "three_rotation",
        "kerr_approx",
        "two_level",
        "leading_perturbation",
        "err_two_rotation",
        "err_three_rotation",
        "err_kerr_approx",
        "err_two_level",
        "err_leading_perturbation",
        "eps1_rel",
        "label_switch",
    ]);
    for q in &points {
        let err = |v: Option<f64>| match v {
            Some(v) if !q.label_switch => q.relative_error(v),
            _ => f64::NAN,
        };
        t.push(vec![
            q.detuning,
            q.numeric,
            q.two_rotation,
            q.three_rotation,
            masked(q.kerr_approx),
            q.two_level,
            masked(q.leading_perturbation),
            err(Some(q.two_rotation)),
            err(Some(q.three_rotation)),
            err(q.kerr_approx),
            err(Some(q.two_level)),
            err(q.leading_perturbation),
            q.eps1.map_or(f64::NAN, |e| (e / q.numeric).abs()),
            if q.label_switch { 1.0 } else { 0.0 },
        ]);
    }
    let t = t.select(2, &c.method);
    t.write_csv(&c.out.join("fig3.csv"))?;
    let err_cols: Vec<&str> = t.columns.iter().filter(|s| s.starts_with("err_")).map(|s| s.as_str()).collect();
    write(
        &c.out,
        "fig3.svg",
        &line_plot("ZZ relative error near the CZ crossing", "omega1 - omega2", "relative error", &series(&t, "detuning", &err_cols), true),
    )?;

    let kept: Vec<_> = points.iter().filter(|q| !q.label_switch).collect();
    let better = kept
        .iter()
        .filter(|q| q.relative_error(q.two_rotation) <= q.relative_error(q.two_level) / 10.0)
        .count();
    let share = better as f64 / kept.len().max(1) as f64;
    println!(
        "fig3: {} points, {} masked; two_rotation 10x better than two_level at {:.1}%",
        points.len(),
        points.len() - kept.len(),
        100.0 * share
    );
    if c.check && share < 0.9 {
        return Err(CliError::Check(format!("two_rotation improves on two_level at only {:.1}% of points", 100.0 * share)));
    }
    Ok(t)
}

pub fn chain_defaults() -> CqedParams {
    CqedParams {
        alpha1: -0.33,
        alpha2: -0.33,
        g1: 0.05,
        g2: 0.05,
        levels: Levels::Uniform(4),
        ..CqedParams::default()
    }
}

fn uniform_levels(p: &CqedParams) -> CliResult<usize> {
    let dims = p.levels.resolve(3).map_err(CliError::input)?;
    if dims.iter().any(|&d| d != dims[0]) {
        return Err(CliError::Input("this sweep needs one level count for all subsystems".into()));
    }
    Ok(dims[0])
}

/// Left root of the zero circle at `diff`, if the cut crosses it.
pub fn circle_root(diff: f64, alpha: f64) -> Option<f64> {
    let r2 = alpha * alpha - diff * diff;
    (r2 >= 0.0).then(|| alpha - r2.sqrt())
}

fn numeric_cut_zero(p: &CqedParams, g: f64, diff: f64, lo: f64, hi: f64) -> Option<f64> {
    let f = |s: f64| {
        let q = DispersiveParams::from_sum_difference(s, diff, p.alpha1, g).to_cqed(uniform_levels(p).unwrap_or(4));
        zeta_numeric_chain(&q).map_or(f64::NAN, |z| z.value)
    };
    first_zero(f, lo, hi, 70, 1e-9)
}

/// |zeta| landscape over `(Delta_+, Delta_-)` for the fourth-order formula
/// and the exact chain, plus the dip cut at `Delta_- = 0.4 |alpha|`.
pub fn fig4(c: &Common) -> CliResult<(Table, Table)> {
    let p = load_params(c.config.as_deref(), chain_defaults(), c.levels)?;
    let levels = uniform_levels(&p)?;
    let (alpha, g) = (p.alpha1, p.g1);
    let a = alpha.abs();
    let grids = pick_grids(
        &c.grids,
        &[
            Grid::new("sum", -3.0 * a, 2.0 * a, 51),
            Grid::new("diff", 0.0, 2.0 * a, 21),
            Grid::new("cut", -0.9, -0.2, 141),
        ],
    )?;
    let (sums, diffs, cut) = (grids[0].points(), grids[1].points(), grids[2].points());

    let cells: Vec<(f64, f64)> = diffs.iter().flat_map(|&d| sums.iter().map(move |&s| (s, d))).collect();
    let values = cells
        .par_iter()
        .map(|&(s, d)| {
            let dp = DispersiveParams::from_sum_difference(s, d, alpha, g);
            let z4 = zeta4(&dp).ok().map(|z| z.value.abs());
            let num = zeta_numeric_chain(&dp.to_cqed(levels))?;
            let num = (!num.ambiguous).then_some(num.value.abs());
            Ok((masked(z4), masked(num)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut grid = Table::new(["sum", "diff", "abs_zeta4", "abs_numeric", "circle_residual"]);
    for (&(s, d), &(z4, num)) in cells.iter().zip(&values) {
        grid.push(vec![s, d, z4, num, zero_circle_residual(s, d, alpha)]);
    }
    let grid = grid.select(2, &c.method);
    grid.write_csv(&c.out.join("fig4_grid.csv"))?;

    let circle: Vec<(f64, f64)> = (0..=90)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / 90.0;
            (alpha + a * t.cos(), a * t.sin())
        })
        .collect();
    for (pick, name) in [(0usize, "zeta4"), (1, "numeric")] {
        if grid.columns.iter().any(|c| c == &format!("abs_{name}")) {
            let rows: Vec<Vec<f64>> = values
                .chunks(sums.len())
                .map(|row| row.iter().map(|v| if pick == 0 { v.0 } else { v.1 }).collect())
                .collect();
            write(
                &c.out,
                &format!("fig4_{name}.svg"),
                &heatmap(&format!("|zeta| ({name})"), "Delta_+", "Delta_-", &sums, &diffs, &rows, &circle),
            )?;
        }
    }

    let diff = 0.4 * a;
    let cut_points = cut
        .par_iter()
        .map(|&s| dispersive_point(s, diff, alpha, g, levels))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(["sum", "numeric", "zeta4", "zeta6", "npad8", "disp"]);
    for q in &cut_points {
        let num = if q.numeric_ambiguous { f64::NAN } else { q.numeric };
        t.push(vec![q.sum, num, masked(q.zeta4), masked(q.zeta6), q.npad8, masked(q.disp)]);
    }
    let t = t.select(1, &c.method);
    t.write_csv(&c.out.join("fig4_cut.csv"))?;
    let names: Vec<&str> = t.columns[1..].iter().map(|s| s.as_str()).collect();
    write(
        &c.out,
        "fig4_cut.svg",
        &line_plot("ZZ along Delta_- = 0.4 |alpha|", "Delta_+", "zeta", &series(&t, "sum", &names), false),
    )?;

    let root = circle_root(diff, alpha);
    let zero = numeric_cut_zero(&p, g, diff, cut[0], cut[cut.len() - 1]);
    println!(
        "fig4: {} grid cells, {} cut points; circle root {}, numeric zero {}",
        cells.len(),
        cut.len(),
        root.map_or("none".into(), |r| format!("{r:.6}")),
        zero.map_or("none".into(), |z| format!("{z:.6}"))
    );
    if c.check {
        match (root, zero) {
            (Some(r), Some(z)) if z.abs() < r.abs() => {}
            _ => return Err(CliError::Check("numeric zero does not sit inside the zero circle".into())),
        }
    }
    Ok((grid, t))
}

pub fn fig5_defaults() -> CqedParams {
    CqedParams {
        omega1: 5.06,
        omega2: 5.0,
        alpha1: -0.33,
        alpha2: -0.33,
        g1: -0.003,
        omega_d: 5.0,
        levels: Levels::Uniform(4),
        ..CqedParams::default()
    }
}

/// ZX strength against drive amplitude.
pub fn fig5(c: &Common) -> CliResult<Table> {
    let p = load_params(c.config.as_deref(), fig5_defaults(), c.levels)?;
    let detuning = p.omega1 - p.omega2;
    let grids = pick_grids(&c.grids, &[Grid::new("Omega", 0.0, detuning.abs(), 31)])?;
    let tol = c.tol.unwrap_or(1e-12);
    let points = grids[0]
        .points()
        .par_iter()
        .map(|&w| cr_point(&p, w, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(["Omega", "analytical", "numeric", "pipeline", "small_drive"]);
    for q in &points {
        t.push(vec![q.drive, q.analytical, q.numeric, q.pipeline, q.small_drive]);
    }
    let t = t.select(1, &c.method);
    t.write_csv(&c.out.join("fig5.csv"))?;
    let names: Vec<&str> = t.columns[1..].iter().map(|s| s.as_str()).collect();
    write(
        &c.out,
        "fig5.svg",
        &line_plot("Cross-resonance ZX strength", "Omega", "omega_ZX", &series(&t, "Omega", &names), false),
    )?;
    println!("fig5: {} drive amplitudes", points.len());
    Ok(t)
}

/// Shift of the exact dip-cut zero with the resonator coupling.
pub fn fig7(c: &Common) -> CliResult<(Table, Table)> {
    let p = load_params(c.config.as_deref(), chain_defaults(), c.levels)?;
    let levels = uniform_levels(&p)?;
    let alpha = p.alpha1;
    let diff = 0.4 * alpha.abs();
    let grids = pick_grids(&c.grids, &[Grid::new("g", 0.025, 0.075, 3), Grid::new("cut", -0.9, -0.2, 71)])?;
    let (gs, cut) = (grids[0].points(), grids[1].points());

    let mut curves = Table::new(std::iter::once("sum".to_string()).chain(gs.iter().map(|g| format!("numeric_g{g}"))));
    let columns = gs
        .par_iter()
        .map(|&g| {
            cut.iter()
                .map(|&s| {
                    let q = DispersiveParams::from_sum_difference(s, diff, alpha, g).to_cqed(levels);
                    Ok(zeta_numeric_chain(&q)?.value)
                })
                .collect::<CliResult<Vec<f64>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    for (i, &s) in cut.iter().enumerate() {
        curves.push(std::iter::once(s).chain(columns.iter().map(|col| col[i])).collect());
    }
    curves.write_csv(&c.out.join("fig7_cut.csv"))?;

    let zeros: Vec<Option<f64>> = gs
        .par_iter()
        .map(|&g| numeric_cut_zero(&p, g, diff, cut[0], cut[cut.len() - 1]))
        .collect();
    let root = masked(circle_root(diff, alpha));
    let mut t = Table::new(["g", "zero_sum", "circle_root"]);
    for (&g, z) in gs.iter().zip(&zeros) {
        t.push(vec![g, masked(*z), root]);
    }
    t.write_csv(&c.out.join("fig7_zeros.csv"))?;
    let names: Vec<&str> = curves.columns[1..].iter().map(|s| s.as_str()).collect();
    write(
        &c.out,
        "fig7.svg",
        &line_plot("Exact ZZ along the dip cut", "Delta_+", "zeta", &series(&curves, "sum", &names), false),
    )?;
    for (&g, z) in gs.iter().zip(&zeros) {
        println!("fig7: g = {g}: zero at {}", z.map_or("none".into(), |z| format!("{z:.6}")));
    }
    if c.check {
        let ordered = zeros.windows(2).all(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b.abs() < a.abs(),
            _ => false,
        });
        if !ordered || zeros.iter().any(Option::is_none) {
            return Err(CliError::Check("|Delta_+| of the zero does not shrink with g".into()));
        }
    }
    Ok((t, curves))
}
