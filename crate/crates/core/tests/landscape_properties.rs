use farmscape::grid::Grid;
use farmscape::landscape::{read_raster, scaling_laws, write_raster, Cover, Geometry, Landscape, LandscapeParams, ScalingLaw};
use farmscape::rng::StreamRng;
use farmscape::Error;
use proptest::prelude::*;

fn geometry(n: usize) -> Geometry {
    Geometry {
        rows: n,
        cols: n,
        cell_area: 0.01,
    }
}

fn params_for(farm_size: f64, seed: u64, n: usize) -> LandscapeParams {
    let s = scaling_laws(farm_size, &ScalingLaw::default()).unwrap();
    LandscapeParams {
        geometry: geometry(n),
        field_size: s.field_size,
        hedgerow_share: s.hedgerow_share,
        grassland_share: s.grassland_share,
        seed,
    }
}

/// Every hedgerow cell touches a different field in the field map.
fn assert_margin_property(land: &Landscape) {
    let ids = land.field_id();
    for (i, c) in land.cover().iter().enumerate() {
        if *c == Cover::Hedgerow {
            let own = ids[i];
            assert!(
                ids.neighbors4(i).iter().any(|&j| ids[j] != own),
                "hedgerow cell {:?} is interior to field {own}",
                ids.coords(i)
            );
        }
    }
}

#[test]
fn shares_exact_and_hedgerows_on_margins_for_random_farms() {
    let mut rng = StreamRng::new(0x5eed);
    let n = 200;
    let tol = 1.0 / (n * n) as f64 + 1e-12;
    for _ in 0..50 {
        let farm_size = 10f64.powf(rng.next_f64() * 3.3);
        let seed = rng.next_u64();
        let p = params_for(farm_size, seed, n);
        let land = Landscape::generate(&p).unwrap();
        let st = land.stats();
        assert!((st.realized_h - p.hedgerow_share).abs() <= tol, "L={farm_size}: h {} vs {}", st.realized_h, p.hedgerow_share);
        assert!((st.realized_g - p.grassland_share).abs() <= tol, "L={farm_size}: g {} vs {}", st.realized_g, p.grassland_share);
        assert_margin_property(&land);
    }
}

#[test]
fn single_field_cannot_host_hedgerows() {
    let p = LandscapeParams {
        geometry: geometry(30),
        field_size: 9.0,
        hedgerow_share: 0.01,
        grassland_share: 0.0,
        seed: 3,
    };
    match Landscape::generate(&p) {
        Err(Error::InfeasibleShare { .. }) => {}
        other => panic!("expected an infeasible share, got {other:?}"),
    }
}

#[test]
fn scaling_laws_are_monotone() {
    let law = ScalingLaw::default();
    let mut prev = scaling_laws(1.0, &law).unwrap();
    for k in 1..60 {
        let l = 10f64.powf(k as f64 * 0.05);
        let s = scaling_laws(l, &law).unwrap();
        assert!(s.field_size > prev.field_size);
        assert!(s.grassland_share < prev.grassland_share);
        assert!(s.hedgerow_share < prev.hedgerow_share);
        prev = s;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), farm_size in 2.0f64..1500.0) {
        let p = params_for(farm_size, seed, 80);
        let a = Landscape::generate(&p).unwrap();
        let b = Landscape::generate(&p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn raster_round_trip_is_exact(seed in any::<u64>(), farm_size in 2.0f64..500.0) {
        let land = Landscape::generate(&params_for(farm_size, seed, 60)).unwrap();
        let mut buf = Vec::new();
        write_raster(&land, &mut buf).unwrap();
        let back = read_raster(buf.as_slice()).unwrap();
        prop_assert_eq!(back.cover(), land.cover());
        prop_assert_eq!(back.field_id(), land.field_id());
        let mut again = Vec::new();
        write_raster(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn shares_exact_for_arbitrary_requests(
        seed in any::<u64>(),
        field_size in 0.5f64..8.0,
        h in 0.0f64..0.05,
        g in 0.0f64..0.4,
    ) {
        let n = 100;
        let p = LandscapeParams { geometry: geometry(n), field_size, hedgerow_share: h, grassland_share: g, seed };
        match Landscape::generate(&p) {
            Ok(land) => {
                let st = land.stats();
                let tol = 1.0 / (n * n) as f64 + 1e-12;
                prop_assert!((st.realized_h - h).abs() <= tol);
                prop_assert!((st.realized_g - g).abs() <= tol);
                assert_margin_property(&land);
            }
            Err(Error::InfeasibleShare { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn uniform_landscapes_have_one_cover(n in 2usize..20) {
        let land = Landscape::uniform(geometry(n), Cover::Grassland);
        prop_assert_eq!(land.count(Cover::Grassland), n * n);
        prop_assert_eq!(land.cover(), &Grid::filled(n, n, Cover::Grassland));
    }
}
