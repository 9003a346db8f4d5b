//! End-to-end pipeline checks: vortex beam -> forked grating -> ideal lens
//! -> per-order observables, plus the pinhole sorter.

use oamsim_core::*;

const ELECTRON_200KV: f64 = 2.50793404505e-12;

/// Shared small-scale geometry: 1024^2 grid, 18 px per period, 12 periods
/// across the aperture.
struct Bench {
    grid: GridSpec,
    grating_period: f64,
    aperture_radius: f64,
    focal_length: f64,
}

fn bench() -> Bench {
    let pitch = 50e-9;
    Bench {
        grid: GridSpec::square(1024, pitch, ELECTRON_200KV).unwrap(),
        grating_period: 18.0 * pitch,
        aperture_radius: 108.0 * pitch,
        focal_length: 1.0,
    }
}

fn diffract(b: &Bench, m_in: i32, burgers: i32) -> ComplexField {
    let beam = make_beam(
        &b.grid,
        &BeamSpec::vortex_disk(m_in, 1.05 * b.aperture_radius),
    )
    .unwrap();
    let spec = ForkedGratingSpec {
        period: b.grating_period,
        burgers,
        aperture_radius: b.aperture_radius,
        duty: 0.5,
        center: (0.0, 0.0),
    };
    let mask = render_forked_grating(&spec, &b.grid).unwrap();
    let masked = beam.apply_mask(&mask).unwrap();
    lens_fourier_transform(&masked, b.focal_length).unwrap()
}

fn analyze(b: &Bench, out: &ComplexField) -> DiffractionReport {
    let params = OrderAnalysisParams::new(b.grating_period, b.focal_length, -3, 3);
    analyze_orders(out, &params).unwrap()
}

#[test]
fn oam_transfer_rule_sample() {
    let b = bench();
    for (m_in, burgers) in [(2, 1), (-3, 2), (0, 1), (1, 2)] {
        let out = diffract(&b, m_in, burgers);
        let report = analyze(&b, &out);
        for n in [-3i32, -1, 1, 3] {
            let expected = m_in + n * burgers;
            let order = report.order(n).unwrap();
            assert_eq!(
                order.winding,
                Some(expected),
                "winding of order {n} for (m={m_in}, b={burgers})"
            );
            assert_eq!(
                order.dominant_q,
                Some(expected),
                "dominant q of order {n} for (m={m_in}, b={burgers})"
            );
        }
    }
}

#[test]
fn transmitted_order_keeps_the_input_charge() {
    let b = bench();
    let out = diffract(&b, 2, 1);
    let report = analyze(&b, &out);
    let zero = report.order(0).unwrap();
    assert_eq!(zero.winding, Some(2));
    assert_eq!(zero.dominant_q, Some(2));
}

#[test]
fn mirror_law_and_zero_input_symmetry() {
    let b = bench();
    // P_n(+m) == P_{-n}(-m): complex conjugation of the real-mask pipeline
    let plus = analyze(&b, &diffract(&b, 2, 1));
    let minus = analyze(&b, &diffract(&b, -2, 1));
    for n in [-3i32, -1, 0, 1, 3] {
        let a = plus.order(n).unwrap().power;
        let bb = minus.order(-n).unwrap().power;
        assert!(
            (a - bb).abs() <= 1e-6 * (a + bb),
            "mirror law at order {n}: {a:.6e} vs {bb:.6e}"
        );
    }
    // zero-OAM input: symmetric orders to 1e-6
    let zero = analyze(&b, &diffract(&b, 0, 1));
    for n in [1i32, 3] {
        let a = zero.asymmetry(n).unwrap();
        assert!(a.abs() < 1e-6, "A_{n} = {a:.3e} for m_in = 0");
    }
}

#[test]
fn ring_radii_grow_with_output_charge() {
    let b = bench();
    let out = diffract(&b, 2, 2);
    let report = analyze(&b, &out);
    // output charges at orders -1, 0, +1: 0, 2, 4
    let r = |n: i32| report.order(n).unwrap().ring_radius;
    assert!(report.order(-1).unwrap().ring_on_axis);
    assert!(r(0) > 0.0);
    assert!(r(1) > r(0), "ring({}) vs ring({})", r(1), r(0));
}

/// Sorter geometry scaled to a 1024^2 grid: Gaussian input, narrow-slit
/// grating so the 11 usable orders carry comparable amplitudes.
fn sorter_config(grid: &GridSpec) -> SorterConfig {
    let waist = 32.0 * grid.pitch;
    let period = std::f64::consts::PI * waist / 2.3;
    let spacing = grid.wavelength * 1.0 / period;
    SorterConfig {
        grating: ForkedGratingSpec {
            period,
            burgers: 1,
            aperture_radius: 160.0 * grid.pitch,
            duty: 0.1,
            center: (0.0, 0.0),
        },
        focal_length: 1.0,
        pinhole_radius: 0.2 * spacing,
        n_min: -5,
        n_max: 5,
    }
}

#[test]
fn sorter_identifies_pure_vortices() {
    let g = GridSpec::square(1024, 50e-9, ELECTRON_200KV).unwrap();
    let config = sorter_config(&g);
    let waist = 32.0 * g.pitch;
    for m_in in [-5, -2, 0, 3, 5] {
        let beam = make_beam(&g, &BeamSpec::gaussian(m_in, waist)).unwrap();
        let result = sort_oam(&beam, &config).unwrap();
        assert_eq!(result.m_hat, m_in, "transmissions: {:?}", result.per_order_transmission);
        assert!(
            result.confidence > 0.3,
            "m={m_in}: confidence {}",
            result.confidence
        );
    }
}

#[test]
fn sorter_max_order_carries_zero_charge() {
    let g = GridSpec::square(1024, 50e-9, ELECTRON_200KV).unwrap();
    let config = sorter_config(&g);
    let waist = 32.0 * g.pitch;
    let m_in = 3;
    let beam = make_beam(&g, &BeamSpec::gaussian(m_in, waist)).unwrap();
    let mask = render_forked_grating(&config.grating, &g).unwrap();
    let out = lens_fourier_transform(&beam.apply_mask(&mask).unwrap(), config.focal_length)
        .unwrap();
    let result = sort_oam(&beam, &config).unwrap();
    let n_star = -result.m_hat * config.grating.burgers;
    let spacing = config.order_spacing(g.wavelength);
    let center = (n_star as f64 * spacing, 0.0);
    let spec = azimuthal_mode_spectrum(
        &out,
        center,
        out.grid().pitch,
        0.45 * spacing,
        -8..=8,
    )
    .unwrap();
    assert_eq!(spec.dominant_q, 0);
}

#[test]
fn sorter_rejects_balanced_superposition() {
    let g = GridSpec::square(1024, 50e-9, ELECTRON_200KV).unwrap();
    let config = sorter_config(&g);
    let waist = 32.0 * g.pitch;
    let plus = make_beam(&g, &BeamSpec::gaussian(2, waist)).unwrap();
    let minus = make_beam(&g, &BeamSpec::gaussian(-2, waist)).unwrap();
    let sum = ComplexField::new(
        g.clone(),
        ndarray::Zip::from(plus.values())
            .and(minus.values())
            .map_collect(|a, b| a + b),
    )
    .unwrap()
    .normalized()
    .unwrap();
    match sort_oam(&sum, &config) {
        Err(Error::AmbiguousSort { candidates }) => {
            let ns: Vec<i32> = candidates.iter().map(|c| c.0).collect();
            assert!(ns.contains(&2) && ns.contains(&-2), "candidates {ns:?}");
        }
        other => panic!("expected ambiguity, got {other:?}"),
    }
}

#[test]
fn sorter_tolerates_small_decentering() {
    let g = GridSpec::square(1024, 50e-9, ELECTRON_200KV).unwrap();
    let config = sorter_config(&g);
    let waist = 32.0 * g.pitch;
    for (m_in, dx, dy) in [(3, 2.0, 0.0), (-2, 0.0, -2.0), (1, 1.0, 1.0)] {
        let spec = BeamSpec {
            m: m_in,
            profile: BeamProfile::Gaussian { waist },
            center: (dx * g.pitch, dy * g.pitch),
        };
        let beam = make_beam(&g, &spec).unwrap();
        let result = sort_oam(&beam, &config).unwrap();
        assert_eq!(result.m_hat, m_in, "offset ({dx},{dy})");
    }
}
