//! Standalone SVG figures. Output depends only on the input data.

use std::f64::consts::TAU;
use std::fmt::Write;

use lindspec_core::diagnostics::{reference_pdf, ReferenceKind};
use lindspec_core::C64;

use crate::error::CliError;
use crate::experiment::SpacingMode;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;
/// Spacing histograms cover `[0, S_MAX)`.
pub const S_MAX: f64 = 3.0;
pub const SPACING_BINS: usize = 30;

pub fn default_references(mode: SpacingMode) -> Vec<ReferenceKind> {
    match mode {
        SpacingMode::Planar => vec![ReferenceKind::Poisson2d, ReferenceKind::Ginibre],
        SpacingMode::IntraBand => vec![ReferenceKind::PoissonReal, ReferenceKind::WignerDyson],
    }
}

fn colour(kind: ReferenceKind) -> &'static str {
    match kind {
        ReferenceKind::Poisson2d => "#1f77b4",
        ReferenceKind::Ginibre => "#d62728",
        ReferenceKind::WignerDyson => "#2ca02c",
        ReferenceKind::PoissonReal => "#9467bd",
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
}

fn empty(what: &str) -> CliError {
    CliError::Validation(format!("no {what} to plot"))
}

/// Histogram density of `samples` on `[0, S_MAX)`.
pub fn spacing_histogram(samples: &[f64]) -> Vec<f64> {
    let width = S_MAX / SPACING_BINS as f64;
    let mut h = vec![0.0; SPACING_BINS];
    for &s in samples {
        if (0.0..S_MAX).contains(&s) {
            h[((s / width) as usize).min(SPACING_BINS - 1)] += 1.0;
        }
    }
    let norm = samples.len() as f64 * width;
    h.iter_mut().for_each(|v| *v /= norm);
    h
}

/// Density histogram in one `<g class="bars">` plus one `<path class="curve">` per reference.
pub fn spacings_plot(samples: &[f64], references: &[ReferenceKind]) -> Result<String, CliError> {
    if samples.is_empty() {
        return Err(empty("spacings"));
    }
    let hist = spacing_histogram(samples);
    let grid: Vec<f64> = (0..=300).map(|i| i as f64 * S_MAX / 300.0).collect();
    let mut curves = Vec::new();
    for &kind in references {
        let ys: Vec<f64> = grid.iter().map(|&s| reference_pdf(kind, s)).collect::<Result<_, _>>().map_err(CliError::Numerical)?;
        curves.push((kind, ys));
    }
    let y_max = hist.iter().chain(curves.iter().flat_map(|c| c.1.iter())).cloned().fold(0.0, f64::max).max(1e-9) * 1.05;
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let x = |s: f64| MARGIN + s / S_MAX * pw;
    let y = |p: f64| HEIGHT - MARGIN - p / y_max * ph;

    let mut out = String::new();
    header(&mut out, "spacing distribution");
    let _ = writeln!(out, r##"<g class="bars" fill="#bbbbbb" stroke="#888888">"##);
    let width = S_MAX / SPACING_BINS as f64;
    for (i, &v) in hist.iter().enumerate() {
        let (x0, x1) = (x(i as f64 * width), x((i + 1) as f64 * width));
        let _ = writeln!(out, r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#, x0, y(v), x1 - x0, y(0.0) - y(v));
    }
    let _ = writeln!(out, "</g>");
    for (kind, ys) in &curves {
        let mut d = String::new();
        for (i, (&s, &p)) in grid.iter().zip(ys).enumerate() {
            let _ = write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, x(s), y(p));
        }
        let _ = writeln!(
            out,
            r#"<path class="curve" data-reference="{}" d="{d}" fill="none" stroke="{}" stroke-width="2"/>"#,
            kind.name(),
            colour(*kind)
        );
    }
    axes(&mut out, "s", "P(s)");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

fn axes(out: &mut String, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{b}" x2="{m}" y2="{m}"/></g>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text><text x="12" y="{:.1}">{ylabel}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0,
        MARGIN - 10.0
    );
}

/// Equal-area polar heatmap of complex spacing ratios on the unit disk.
pub fn csr_heatmap(ratios: &[C64], radial_bins: usize, angular_bins: usize) -> Result<String, CliError> {
    if ratios.is_empty() {
        return Err(empty("ratios"));
    }
    if radial_bins == 0 || angular_bins == 0 {
        return Err(CliError::Validation("heatmap needs at least one bin per axis".into()));
    }
    let mut mass = vec![0.0; radial_bins * angular_bins];
    for z in ratios {
        let ri = ((z.norm_sqr().min(1.0) * radial_bins as f64) as usize).min(radial_bins - 1);
        let ai = ((z.arg().rem_euclid(TAU) / TAU * angular_bins as f64) as usize).min(angular_bins - 1);
        mass[ri * angular_bins + ai] += 1.0 / ratios.len() as f64;
    }
    let uniform = 1.0 / mass.len() as f64;
    let peak = mass.iter().cloned().fold(0.0, f64::max).max(uniform);
    let (cx, cy, radius) = (WIDTH / 2.0, HEIGHT / 2.0, HEIGHT / 2.0 - MARGIN / 2.0);
    let pt = |r: f64, t: f64| (cx + radius * r * t.cos(), cy - radius * r * t.sin());

    let mut out = String::new();
    header(&mut out, "complex spacing ratios");
    let _ = writeln!(out, r#"<g class="cells" stroke="white" stroke-width="0.5">"#);
    for ri in 0..radial_bins {
        let (r0, r1) = ((ri as f64 / radial_bins as f64).sqrt(), ((ri + 1) as f64 / radial_bins as f64).sqrt());
        for ai in 0..angular_bins {
            let (t0, t1) = (ai as f64 * TAU / angular_bins as f64, (ai + 1) as f64 * TAU / angular_bins as f64);
            let level = mass[ri * angular_bins + ai] / peak;
            let shade = (255.0 * (1.0 - level)).round() as u8;
            let (a, b, c, d) = (pt(r1, t0), pt(r1, t1), pt(r0, t1), pt(r0, t0));
            let large = if t1 - t0 > std::f64::consts::PI { 1 } else { 0 };
            let _ = writeln!(
                out,
                r#"<path d="M{:.3},{:.3} A{r1o:.3},{r1o:.3} 0 {large} 0 {:.3},{:.3} L{:.3},{:.3} A{r0o:.3},{r0o:.3} 0 {large} 1 {:.3},{:.3} Z" fill="rgb(255,{shade},{shade})"/>"#,
                a.0, a.1, b.0, b.1, c.0, c.1, d.0, d.1,
                r1o = r1 * radius,
                r0o = r0 * radius
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="{radius}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

/// Eigenvalues in the complex plane.
pub fn band_scatter(points: &[C64]) -> Result<String, CliError> {
    if points.is_empty() {
        return Err(empty("eigenvalues"));
    }
    let (mut re0, mut re1, mut im0, mut im1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in points {
        re0 = re0.min(z.re);
        re1 = re1.max(z.re);
        im0 = im0.min(z.im);
        im1 = im1.max(z.im);
    }
    let pad = |a: f64, b: f64| if b - a > 0.0 { (b - a) * 0.05 } else { 0.5 };
    let (pr, pi) = (pad(re0, re1), pad(im0, im1));
    let (re0, re1, im0, im1) = (re0 - pr, re1 + pr, im0 - pi, im1 + pi);
    let x = |v: f64| MARGIN + (v - re0) / (re1 - re0) * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - (v - im0) / (im1 - im0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, "spectrum");
    let _ = writeln!(out, r##"<g class="points" fill="#1f77b4">"##);
    for z in points {
        let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5"/>"#, x(z.re), y(z.im));
    }
    let _ = writeln!(out, "</g>");
    axes(&mut out, "Re λ", "Im λ");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
