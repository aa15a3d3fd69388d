use chromascreen::color::*;
use chromascreen::plates::*;

fn vanishing_designs() -> Vec<PlateDesign> {
    let mut out = Vec::new();
    for target in Dichromat::ALL {
        for d in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
            out.push(PlateDesign::vanishing(target, d));
        }
    }
    out
}

fn mean_linear(colors: &[Srgb8]) -> LinearRgb {
    let n = colors.len() as f64;
    let mut sum = [0.0; 3];
    for c in colors {
        let v = c.to_linear().to_array();
        for k in 0..3 {
            sum[k] += v[k];
        }
    }
    LinearRgb::new(sum[0] / n, sum[1] / n, sum[2] / n)
}

fn seen(figure: LinearRgb, ground: LinearRgb, profile: CvdProfile) -> f64 {
    delta_e(
        linear_to_lab(simulate(figure, profile)),
        linear_to_lab(simulate(ground, profile)),
    )
}

#[test]
fn packing_fill_bound() {
    let mut worst = f64::INFINITY;
    for seed in 0..20 {
        let p = pack_disk(seed, &PackingParams::default()).unwrap();
        worst = worst.min(p.fill_fraction);
        let direct: f64 = p.disks.iter().map(|d| d.radius * d.radius).sum();
        assert!((direct - p.fill_fraction).abs() < 1e-12);
    }
    assert!(worst >= 0.45, "minimum fill {worst}");
}

#[test]
fn protan_pairs_are_feasible_on_a_grid() {
    // fixed-L sweep of the a*b* plane, independent of the pair search
    let profile = Dichromat::Protan.profile();
    let mut found = false;
    'outer: for l in [50.0, 60.0] {
        let grid: Vec<Srgb8> = (-12..=12)
            .flat_map(|i| (-12..=12).map(move |j| (i as f64 * 4.0, j as f64 * 4.0)))
            .map(|(a, b)| Lab::new(l, a, b))
            .filter(|lab| lab.to_linear().in_gamut())
            .map(|lab| lab.to_srgb8())
            .collect();
        for (i, &a) in grid.iter().enumerate() {
            for &b in &grid[i + 1..] {
                if delta_e(a.to_lab(), b.to_lab()) >= 30.0
                    && delta_e(simulated_lab(a, profile), simulated_lab(b, profile)) <= 4.0
                {
                    found = true;
                    break 'outer;
                }
            }
        }
    }
    assert!(found);
}

#[test]
fn vanishing_pairs_reverify() {
    for seed in 0..6 {
        for target in Dichromat::ALL {
            let cert = pick_vanishing_pair(target.profile(), 0.0, seed).unwrap();
            let de_normal = delta_e(cert.figure.to_lab(), cert.ground.to_lab());
            let de_sim = delta_e(
                simulated_lab(cert.figure, target.profile()),
                simulated_lab(cert.ground, target.profile()),
            );
            assert!((de_normal - cert.de_normal).abs() <= 1e-9);
            assert!((de_sim - cert.de_simulated).abs() <= 1e-9);
            assert!(de_normal >= D_HIGH && de_sim <= d_low(0.0));
        }
    }
    assert!(pick_vanishing_pair(CvdProfile::new(CvdKind::Deutan, 0.5).unwrap(), 0.0, 1).is_err());
}

#[test]
fn certificates_and_camouflage_hold_over_fifty_seeds() {
    let designs = vanishing_designs();
    for seed in 0..50u64 {
        let design = designs[seed as usize % designs.len()];
        let digits = [char::from(b'1' + (seed % 9) as u8)];
        let plate = compose_plate(design, &digits, 1000 + seed).unwrap();
        let target = design.target.unwrap();

        for cert in &plate.certificates {
            let de_normal = delta_e(cert.figure.to_lab(), cert.ground.to_lab());
            let de_sim = delta_e(
                simulated_lab(cert.figure, cert.profile),
                simulated_lab(cert.ground, cert.profile),
            );
            assert!((de_normal - cert.de_normal).abs() <= 1e-9);
            assert!((de_sim - cert.de_simulated).abs() <= 1e-9);
            assert!(de_normal >= D_HIGH, "seed {seed}");
            assert!(de_sim <= d_low(design.difficulty), "seed {seed}");
        }

        let regions = plate.regions();
        let figure: Vec<Srgb8> = plate.circles.iter().zip(&regions).filter(|(_, r)| r.is_some()).map(|(c, _)| c.color).collect();
        let ground: Vec<Srgb8> = plate.circles.iter().zip(&regions).filter(|(_, r)| r.is_none()).map(|(c, _)| c.color).collect();
        let (fm, gm) = (mean_linear(&figure), mean_linear(&ground));
        assert!(delta_e(linear_to_lab(fm), linear_to_lab(gm)) >= D_HIGH, "seed {seed}");
        assert!(seen(fm, gm, target.profile()) <= d_low(design.difficulty), "seed {seed}");

        let mean_l = |cs: &[Srgb8]| cs.iter().map(|c| c.to_lab().l).sum::<f64>() / cs.len() as f64;
        assert!((mean_l(&figure) - mean_l(&ground)).abs() <= L_LEAK, "seed {seed}");

        // lightness spread of the ground population
        let ls: Vec<f64> = ground.iter().map(|c| c.to_lab().l).collect();
        let m = ls.iter().sum::<f64>() / ls.len() as f64;
        let sd = (ls.iter().map(|l| (l - m).powi(2)).sum::<f64>() / ls.len() as f64).sqrt();
        assert!(sd >= JITTER_L / 2.0, "seed {seed}: sd {sd}");

        assert!(validate_plate(&plate).passed, "seed {seed}");
    }
}

#[test]
fn answer_keys_match_simulated_visibility() {
    let mut plates = vec![
        compose_plate(PlateDesign::demo(), &['4', '2'], 11).unwrap(),
        compose_plate(PlateDesign::diagnostic(), &['3', '8'], 12).unwrap(),
        compose_plate(PlateDesign::diagnostic(), &['7', '1'], 13).unwrap(),
    ];
    for (i, design) in vanishing_designs().into_iter().enumerate() {
        plates.push(compose_plate(design, &['5'], 20 + i as u64).unwrap());
    }
    for plate in &plates {
        let regions = plate.regions();
        let ground: Vec<Srgb8> = plate.circles.iter().zip(&regions).filter(|(_, r)| r.is_none()).map(|(c, _)| c.color).collect();
        let gm = mean_linear(&ground);
        for viewer in ViewerClass::ALL {
            let target_cell = plate.design.kind == DesignKind::Vanishing
                && plate.design.target.map(ViewerClass::from_dichromat) == Some(viewer);
            if target_cell {
                assert_eq!(plate.expected(viewer), "");
                continue;
            }
            let reading: String = plate
                .glyphs
                .iter()
                .enumerate()
                .filter(|(g, _)| {
                    let dots: Vec<Srgb8> = plate.circles.iter().zip(&regions).filter(|(_, r)| **r == Some(*g)).map(|(c, _)| c.color).collect();
                    seen(mean_linear(&dots), gm, viewer.profile()) >= V_THRESH
                })
                .map(|(_, glyph)| glyph.digit)
                .collect();
            assert_eq!(reading, plate.expected(viewer), "{} {viewer}", plate.id);
        }
    }
}

#[test]
fn circles_do_not_overlap() {
    let plate = compose_plate(PlateDesign::vanishing(Dichromat::Tritan, 0.5), &['9', '0'], 5).unwrap();
    let g = PackingParams::default().g_min;
    for (i, a) in plate.circles.iter().enumerate() {
        assert!(a.cx.hypot(a.cy) <= 1.0 - a.radius + 1e-12);
        for b in &plate.circles[i + 1..] {
            assert!((a.cx - b.cx).hypot(a.cy - b.cy) >= a.radius + b.radius + g - 1e-12);
        }
    }
}

#[test]
fn svg_carries_no_digits_as_text() {
    let plate = compose_plate(PlateDesign::demo(), &['6'], 3).unwrap();
    let svg = render_svg(&plate);
    assert_eq!(svg.matches("<circle").count(), plate.circles.len());
    assert!(!svg.contains("<text"));
    let between: String = svg.split('>').filter_map(|s| s.split('<').next()).collect();
    assert!(between.trim().is_empty());
    assert_eq!(svg, render_svg(&plate));
}
