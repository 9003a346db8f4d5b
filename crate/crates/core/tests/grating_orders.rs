//! Cross-module oracle: far-field order powers of a plane-wave-illuminated
//! straight grating against the analytic square-wave Fourier coefficients.
//!
//! Mesh note: 66 samples per period keeps the pixel comb off the
//! binarization boundary (no tie pixels) so the rendered duty is exactly 1/2,
//! and it is fine enough that the discrete Fourier coefficients of the
//! sampled square wave stay within 2% of the continuum values for |n| <= 5.

use oamsim_core::*;

const ELECTRON_200KV: f64 = 2.50793404505e-12;

struct StraightGratingRun {
    out: ComplexField,
    spacing: f64,
}

fn run_straight_grating() -> StraightGratingRun {
    let pitch = 30e-9;
    let g = GridSpec::square(2048, pitch, ELECTRON_200KV).unwrap();
    let period = 66.0 * pitch;
    let aperture_radius = 495.0 * pitch; // 15 periods across the diameter
    let spec = ForkedGratingSpec {
        period,
        burgers: 0,
        aperture_radius,
        duty: 0.5,
        center: (0.0, 0.0),
    };
    let mask = render_forked_grating(&spec, &g).unwrap();
    let beam = make_beam(&g, &BeamSpec::vortex_disk(0, aperture_radius * 1.05)).unwrap();
    let masked = beam.apply_mask(&mask).unwrap();
    let f = 1.0;
    let out = lens_fourier_transform(&masked, f).unwrap();
    let spacing = g.wavelength * f / period;
    StraightGratingRun { out, spacing }
}

#[test]
fn straight_grating_far_field() {
    let run = run_straight_grating();
    let out = &run.out;
    let spacing = run.spacing;
    let pitch_out = out.grid().pitch;

    // (1) simulated peaks coincide with n*lambda*f/d within one output pixel
    for n in -5i32..=5 {
        if n == 0 || n % 2 == 0 {
            continue;
        }
        let predicted = n as f64 * spacing;
        // search the brightest pixel in a window around the predicted center
        let g = out.grid();
        let i0 = g.col_of(predicted).round() as i64;
        let j0 = (g.ny / 2) as i64;
        let mut best = (0.0f64, 0i64, 0i64);
        for dj in -6..=6i64 {
            for di in -6..=6i64 {
                let (i, j) = ((i0 + di) as usize, (j0 + dj) as usize);
                let v = out.values()[[j, i]].norm_sqr();
                if v > best.0 {
                    best = (v, i as i64, j as i64);
                }
            }
        }
        let x_peak = g.x(best.1 as usize);
        let y_peak = g.y(best.2 as usize);
        assert!(
            (x_peak - predicted).abs() <= pitch_out && y_peak.abs() <= pitch_out,
            "order {n}: peak at ({x_peak:.4e}, {y_peak:.4e}), predicted ({predicted:.4e}, 0)"
        );
    }

    // (2) order power ratios match the analytic |a_n|^2 to 2% for |n| <= 5
    let hw = 0.2 * spacing;
    let p = |n: i32| integrate_box(out, (n as f64 * spacing, 0.0), hw).unwrap();
    let p1 = p(1);
    for n in [3i32, 5] {
        let expected = (grating_order_amplitude(0.5, n).unwrap()
            / grating_order_amplitude(0.5, 1).unwrap())
        .powi(2);
        let got = p(n) / p1;
        assert!(
            (got / expected - 1.0).abs() < 0.02,
            "order {n}: power ratio {got:.5} vs analytic {expected:.5}"
        );
    }

    // (3) even-order extinction in simulation: P2/P1 < 1e-3 at duty 1/2
    let p2 = p(2).max(p(-2));
    assert!(p2 / p1 < 1e-3, "P2/P1 = {:.3e}", p2 / p1);

    // (4) symmetric orders carry equal power for a symmetric input
    for n in [1i32, 3, 5] {
        let a = (p(n) - p(-n)).abs() / (p(n) + p(-n));
        assert!(a < 1e-6, "order {n} asymmetry {a:.3e} for plane-wave input");
    }
}

#[test]
fn order_amplitude_is_symmetric_in_n() {
    for duty in [0.1, 0.25, 0.37, 0.5, 0.8] {
        for n in 1..=6 {
            let pos = grating_order_amplitude(duty, n).unwrap();
            let neg = grating_order_amplitude(duty, -n).unwrap();
            assert!(
                (pos - neg).abs() <= 1e-15 * pos.abs().max(1e-30),
                "duty {duty} n {n}: {pos} vs {neg}"
            );
        }
    }
}

#[test]
fn locate_orders_spacing_is_linear() {
    let g = GridSpec::square(256, 1e-8, ELECTRON_200KV).unwrap();
    let locs = locate_orders(1e-6, g.wavelength, 1.0, 0..=1, &g).unwrap();
    let spacing = g.wavelength * 1.0 / 1e-6;
    assert_eq!(locs[0].x, 0.0);
    assert!((locs[1].x - locs[0].x - spacing).abs() < 1e-18);
}
