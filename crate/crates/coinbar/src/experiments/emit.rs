//! Deterministic result emission: per-scenario CSV files, whitespace plot
//! data, and a self-contained SVG line chart. Re-emitting the same records
//! produces byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::experiments::ExperimentRecord;
use crate::{Error, Result};

/// Formats with 9 significant digits in plain decimal. This fixed encoding
/// is what makes emitted files byte-stable.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        // -0.0 normalizes to 0.0; non-finite values should never reach a
        // file, but render readably if they do.
        if x.is_finite() {
            return "0.00000000".into();
        }
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

const SERIES_HEADER: &str = "scenario,reward_kind,seed,week,mean_world_reward\n";
const ATTENDANCE_HEADER: &str = "scenario,reward_kind,seed,night,count\n";

/// Scenario names in first-appearance order, without duplicates.
fn scenario_names(records: &[ExperimentRecord]) -> Vec<String> {
    let mut names = Vec::new();
    for r in records {
        if !names.contains(&r.scenario) {
            names.push(r.scenario.clone());
        }
    }
    names
}

/// Writes one `<scenario>.csv` per scenario (rows ordered by seed, then
/// week) plus a `<scenario>_attendance.csv` companion with each run's
/// final-week histogram. An empty record list produces a header-only
/// `results.csv` pair so the destination always holds well-formed files.
pub fn emit_csv(records: &[ExperimentRecord], dir: &Path) -> Result<()> {
    if records.is_empty() {
        write_file(&dir.join("results.csv"), SERIES_HEADER)?;
        write_file(&dir.join("results_attendance.csv"), ATTENDANCE_HEADER)?;
        return Ok(());
    }
    for name in scenario_names(records) {
        let group: Vec<&ExperimentRecord> =
            records.iter().filter(|r| r.scenario == name).collect();

        let mut series = String::from(SERIES_HEADER);
        let mut attendance = String::from(ATTENDANCE_HEADER);
        for record in &group {
            let kind = record.reward_kind.token();
            for (run, weekly) in record.run_weekly_world_reward.iter().enumerate() {
                let seed = record.base_seed.wrapping_add(run as u64);
                for (week, value) in weekly.iter().enumerate() {
                    let _ = writeln!(
                        series,
                        "{name},{kind},{seed},{week},{}",
                        format_sig9(*value)
                    );
                }
            }
            for (run, profile) in record.run_final_attendance.iter().enumerate() {
                let seed = record.base_seed.wrapping_add(run as u64);
                for (night, count) in profile.counts.iter().enumerate() {
                    let _ = writeln!(attendance, "{name},{kind},{seed},{night},{count}");
                }
            }
        }
        write_file(&dir.join(format!("{name}.csv")), &series)?;
        write_file(&dir.join(format!("{name}_attendance.csv")), &attendance)?;
    }
    Ok(())
}

/// Writes plotting artifacts into `dir`:
///
/// * `plot.dat` — whitespace columns: week, then each record's cross-run
///   mean world reward (records must share the same week count);
/// * `plot_attendance.dat` — blank-line-separated `night count` blocks, one
///   per record, from the first run's final week;
/// * `plot.svg` — a self-contained line chart of the mean reward curves.
pub fn emit_plot_data(records: &[ExperimentRecord], dir: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Usage("no records to plot".into()));
    }
    let weeks = records[0].weeks;
    for r in records {
        if r.weeks != weeks {
            return Err(Error::Usage(format!(
                "records must share the weeks setting: {} has {} weeks, {} has {}",
                records[0].scenario, weeks, r.scenario, r.weeks
            )));
        }
    }

    let mut dat = String::from("# week");
    for r in records {
        let _ = write!(dat, " {}", r.scenario);
    }
    dat.push('\n');
    for week in 0..weeks {
        let _ = write!(dat, "{week}");
        for r in records {
            let _ = write!(dat, " {}", format_sig9(r.mean_weekly_world_reward[week]));
        }
        dat.push('\n');
    }
    write_file(&dir.join("plot.dat"), &dat)?;

    let mut att = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            att.push('\n');
        }
        let _ = writeln!(att, "# {} seed={}", r.scenario, r.base_seed);
        if let Some(profile) = r.run_final_attendance.first() {
            for (night, count) in profile.counts.iter().enumerate() {
                let _ = writeln!(att, "{night} {count}");
            }
        }
    }
    write_file(&dir.join("plot_attendance.dat"), &att)?;

    write_file(&dir.join("plot.svg"), &render_svg(records))?;
    Ok(())
}

const SVG_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Minimal hand-built SVG line chart of each record's mean reward series.
fn render_svg(records: &[ExperimentRecord]) -> String {
    let width = 800.0;
    let height = 500.0;
    let margin = 60.0;
    let plot_w = width - 2.0 * margin;
    let plot_h = height - 2.0 * margin;

    let weeks = records[0].weeks.max(2);
    let y_max = records
        .iter()
        .flat_map(|r| r.mean_weekly_world_reward.iter())
        .fold(1e-9_f64, |acc, &v| acc.max(v))
        * 1.05;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">week</text>",
        margin + plot_w / 2.0,
        height - margin / 3.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 {} {})\">mean world reward</text>",
        margin / 3.0,
        margin + plot_h / 2.0,
        margin / 3.0,
        margin + plot_h / 2.0
    );
    // Axis extremes.
    let _ = writeln!(
        svg,
        "<text x=\"{margin}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">0</text>",
        height - margin + 16.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        margin + plot_w,
        height - margin + 16.0,
        weeks - 1
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{:.2}</text>",
        margin - 6.0,
        margin + 4.0,
        y_max
    );

    let stride = weeks.div_ceil(1000).max(1);
    for (i, record) in records.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        let mut points = String::new();
        for (t, &v) in record
            .mean_weekly_world_reward
            .iter()
            .enumerate()
            .step_by(stride)
        {
            let x = margin + plot_w * t as f64 / (weeks - 1) as f64;
            let y = height - margin - plot_h * (v / y_max).clamp(0.0, 1.0);
            let _ = write!(points, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.trim_end()
        );
        let ly = margin + 18.0 * (i as f64 + 1.0);
        let lx = margin + plot_w - 10.0;
        let _ = writeln!(
            svg,
            "<text x=\"{lx}\" y=\"{ly}\" font-size=\"12\" text-anchor=\"end\" fill=\"{color}\">{}</text>",
            record.scenario
        );
    }
    svg.push_str("</svg>\n");
    svg
}
