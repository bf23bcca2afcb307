use super::*;
use crate::time::{Bucket, ClockTime, Minutes};
use crate::world::{Category, Poi, PoiId, TravelMatrix, WorldMap};

pub(crate) fn poi(id: u32, category: Category, popularity: u8) -> Poi {
    Poi {
        id: PoiId(id),
        name: format!("{category} {id}"),
        category,
        x_km: id as f64,
        y_km: 0.0,
        brand: None,
        price_level: 1,
        open_minute: 0,
        close_minute: 1440,
        base_dwell: category.base_dwell(),
        popularity: [popularity; 24],
    }
}

/// Symmetric toy map; `drive` and `walk` give minutes for `i < j`.
pub(crate) fn toy(
    pois: Vec<Poi>,
    drive: impl Fn(usize, usize, Bucket) -> u32,
    walk: impl Fn(usize, usize) -> u32,
) -> WorldMap {
    let n = pois.len();
    let cell = |f: &dyn Fn(usize, usize) -> u32| {
        let mut out = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out[i * n + j] = f(i.min(j), i.max(j));
                }
            }
        }
        out
    };
    let drive = Bucket::ALL.map(|b| cell(&|i, j| drive(i, j, b)));
    let walk = cell(&walk);
    let distance = (0..n * n)
        .map(|c| (pois[c / n].x_km - pois[c % n].x_km).abs())
        .collect();
    let matrix = TravelMatrix::from_parts(n, drive, walk, distance).unwrap();
    WorldMap::new(pois, matrix, 0, vec![("gas".into(), "charging".into())]).unwrap()
}

fn at(h: u16, m: u16) -> ClockTime {
    ClockTime::hm(h, m)
}

fn ids(raw: &[u32]) -> Vec<PoiId> {
    raw.iter().map(|&i| PoiId(i)).collect()
}

#[test]
fn direct_trip_costs_one_leg() {
    let map = toy(
        vec![poi(0, Category::Apartment, 0), poi(1, Category::Company, 0)],
        |_, _, _| 17,
        |_, _| 200,
    );
    let q = QuerySpec::new(PoiId(0), PoiId(1), at(9, 0));
    let plan = evaluate_plan(&map, &Itinerary::new(ids(&[0, 1]), at(9, 0)), &q).unwrap();
    assert_eq!(plan.total_min.as_f64(), 17.0);
    assert_eq!(plan.legs.len(), 1);
    assert!(plan.feasible);
}

#[test]
fn intermediate_dwell_is_added() {
    // origin -> cafe (base 5, p = 0) -> destination with legs of 10 and 12.
    let map = toy(
        vec![
            poi(0, Category::Apartment, 0),
            poi(1, Category::Cafe, 0),
            poi(2, Category::Company, 0),
        ],
        |i, j, _| match (i, j) {
            (0, 1) => 10,
            (1, 2) => 12,
            _ => 30,
        },
        |_, _| 200,
    );
    let q = QuerySpec::new(PoiId(0), PoiId(2), at(9, 0));
    let plan = evaluate_plan(&map, &Itinerary::new(ids(&[0, 1, 2]), at(9, 0)), &q).unwrap();
    assert_eq!(plan.total_min.as_f64(), 27.0);
    assert_eq!(plan.leg_sum(), plan.total_min);
    assert_eq!(plan.legs[0].arrive, at(9, 10));
    assert_eq!(plan.legs[1].depart, at(9, 15));
    assert_eq!(plan.legs[1].dwell_min, Minutes::ZERO);
}

#[test]
fn leg_bucket_follows_departure_instant() {
    // Leaving at 10:25 puts the first leg in the morning bucket; the second
    // leg leaves at 10:45 and uses the midday bucket.
    let map = toy(
        vec![
            poi(0, Category::Apartment, 0),
            poi(1, Category::Cafe, 0),
            poi(2, Category::Company, 0),
        ],
        |_, _, b| match b {
            Bucket::B09 => 15,
            Bucket::B12 => 7,
            _ => 3,
        },
        |_, _| 200,
    );
    let q = QuerySpec::new(PoiId(0), PoiId(2), at(10, 25));
    let plan = evaluate_plan(&map, &Itinerary::new(ids(&[0, 1, 2]), at(10, 25)), &q).unwrap();
    assert_eq!(plan.legs[0].travel_min, Minutes::whole(15));
    assert_eq!(plan.legs[1].travel_min, Minutes::whole(7));
    assert_eq!(plan.total_min, Minutes::whole(15 + 5 + 7));
}

#[test]
fn evaluation_rejects_bad_itineraries() {
    let map = toy(
        vec![poi(0, Category::Apartment, 0), poi(1, Category::Company, 0)],
        |_, _, _| 5,
        |_, _| 50,
    );
    let q = QuerySpec::new(PoiId(0), PoiId(1), at(9, 0));
    assert!(evaluate_plan(&map, &Itinerary::new(ids(&[0, 0]), at(9, 0)), &q).is_err());
    assert!(evaluate_plan(&map, &Itinerary::new(ids(&[0, 7]), at(9, 0)), &q).is_err());
    assert!(evaluate_plan(&map, &Itinerary::new(ids(&[0]), at(9, 0)), &q).is_err());
}

fn errand_map() -> WorldMap {
    let mut market = poi(2, Category::Market, 0);
    market.open_minute = 8 * 60;
    market.close_minute = 22 * 60;
    toy(
        vec![
            poi(0, Category::Apartment, 0),
            poi(1, Category::Cafe, 0),
            market,
            poi(3, Category::Company, 0),
        ],
        |_, _, _| 10,
        |_, _| 100,
    )
}

#[test]
fn feasibility_tags() {
    let map = errand_map();
    let mut q = QuerySpec::new(PoiId(0), PoiId(3), at(9, 0)).with_categories(&[Category::Cafe]);
    let ok = Itinerary::new(ids(&[0, 1, 3]), at(9, 0));
    assert_eq!(check_feasibility(&map, &ok, &q).unwrap(), vec![]);

    q.required_categories = vec![Category::Gym];
    assert_eq!(
        check_feasibility(&map, &ok, &q).unwrap(),
        vec![Violation::MissingCategory {
            category: Category::Gym
        }]
    );

    // Arrive at the market at 23:00, after its 22:00 close.
    let q = QuerySpec::new(PoiId(0), PoiId(3), at(22, 50));
    let late = Itinerary::new(ids(&[0, 2, 3]), at(22, 50));
    assert_eq!(
        check_feasibility(&map, &late, &q).unwrap(),
        vec![Violation::ClosedAtArrival { poi: PoiId(2) }]
    );

    // Arrive 21:50, the 20-minute visit runs past close.
    let q = QuerySpec::new(PoiId(0), PoiId(3), at(21, 40));
    let tight = Itinerary::new(ids(&[0, 2, 3]), at(21, 40));
    assert_eq!(
        check_feasibility(&map, &tight, &q).unwrap(),
        vec![Violation::DwellPastClose { poi: PoiId(2) }]
    );

    let mut q = QuerySpec::new(PoiId(0), PoiId(3), at(9, 0));
    q.charge_required = true;
    q.brand_preferences.insert(Category::Cafe, "Morning Mug".into());
    assert_eq!(
        check_feasibility(&map, &ok, &q).unwrap(),
        vec![
            Violation::BrandMismatch {
                category: Category::Cafe,
                poi: PoiId(1)
            },
            Violation::MissingCharge,
        ]
    );
}

/// Apartment 0, charger 1, cafe 2, company 3. The cafe is a 5-minute walk
/// from the charger but a 10-minute drive from everything.
fn charge_map(cafe_popularity: u8) -> WorldMap {
    toy(
        vec![
            poi(0, Category::Apartment, 0),
            poi(1, Category::Charging, 0),
            poi(2, Category::Cafe, cafe_popularity),
            poi(3, Category::Company, 0),
        ],
        |i, j, _| match (i, j) {
            (0, 1) => 12,
            (0, 2) | (1, 2) | (2, 3) => 10,
            (1, 3) => 15,
            _ => 40,
        },
        |i, j| if (i, j) == (1, 2) { 5 } else { 90 },
    )
}

fn charge_query() -> QuerySpec {
    let mut q = QuerySpec::new(PoiId(0), PoiId(3), at(11, 0)).with_categories(&[Category::Cafe, Category::Charging]);
    q.dwell_overrides.insert(Category::Charging, Minutes::whole(35));
    q
}

#[test]
fn cafe_is_absorbed_into_charging_window() {
    // Cafe popularity 20 gives a 6-minute visit: 2*5 + 6 = 16 <= 35.
    let map = charge_map(20);
    let q = charge_query();
    let itinerary = Itinerary::new(ids(&[0, 1, 2, 3]), at(11, 0));
    let plain = evaluate_plan(&map, &itinerary, &q).unwrap();
    assert_eq!(plain.total_min, Minutes::whole(12 + 35 + 10 + 6 + 10));

    let absorbed = apply_charge_absorption(&map, plain.clone(), &q);
    assert_eq!(absorbed.absorptions.len(), 1);
    let a = &absorbed.absorptions[0];
    assert_eq!((a.charging, a.errand), (PoiId(1), PoiId(2)));
    assert_eq!(a.charge_min, Minutes::whole(35));
    assert_eq!(a.errand_dwell_min, Minutes::whole(6));
    assert_eq!(a.combined_min, Minutes::whole(35));
    // Vehicle goes apartment -> charger -> company.
    assert_eq!(absorbed.total_min, Minutes::whole(12 + 35 + 15));
    assert_eq!(absorbed.leg_sum(), absorbed.total_min);
    let drives: Vec<_> = absorbed
        .legs
        .iter()
        .filter(|l| l.mode == Mode::Drive)
        .map(|l| (l.from, l.to))
        .collect();
    assert_eq!(drives, vec![(PoiId(0), PoiId(1)), (PoiId(1), PoiId(3))]);
    assert_eq!(absorbed.legs.iter().filter(|l| l.absorbed_into_charge).count(), 2);
    assert!(absorbed.feasible);
    assert_eq!(absorbed.itinerary, plain.itinerary);

    // Absorption is idempotent.
    assert_eq!(apply_charge_absorption(&map, absorbed.clone(), &q), absorbed);
}

#[test]
fn errand_before_charger_is_absorbed_too() {
    let map = charge_map(20);
    let q = charge_query();
    let itinerary = Itinerary::new(ids(&[0, 2, 1, 3]), at(11, 0));
    let plan = evaluate_full(&map, &itinerary, &q).unwrap();
    assert_eq!(plan.absorptions.len(), 1);
    assert_eq!(plan.total_min, Minutes::whole(12 + 35 + 15));
}

#[test]
fn long_errand_is_not_absorbed() {
    // Charge 30, gym 20 minutes away on foot with a 25-minute visit: 65 > 30.
    let map = toy(
        vec![
            poi(0, Category::Apartment, 0),
            poi(1, Category::Charging, 0),
            poi(2, Category::Gym, 0),
            poi(3, Category::Company, 0),
        ],
        |_, _, _| 10,
        |i, j| if (i, j) == (1, 2) { 20 } else { 90 },
    );
    let q = QuerySpec::new(PoiId(0), PoiId(3), at(11, 0));
    let plan = evaluate_full(&map, &Itinerary::new(ids(&[0, 1, 2, 3]), at(11, 0)), &q).unwrap();
    assert!(plan.absorptions.is_empty());
    assert_eq!(plan.total_min, Minutes::whole(10 + 30 + 10 + 25 + 10));
}

#[test]
fn empty_requirements_give_the_direct_trip() {
    let map = charge_map(0);
    let mut q = QuerySpec::new(PoiId(0), PoiId(3), at(9, 0));
    q.departure = Departure::Candidates(vec![at(18, 0), at(9, 0)]);
    let solution = solve_optimal(&map, &q).unwrap();
    let plan = solution.plan().unwrap();
    assert_eq!(plan.itinerary.stops, ids(&[0, 3]));
    // Every bucket has the same drive time, so the earlier departure wins the tie.
    assert_eq!(plan.departure(), at(9, 0));
    assert_eq!(solution.considered, 2);
}

#[test]
fn single_cafe_choice_matches_hand_enumeration() {
    // Three cafes with different detours and popularity.
    let map = toy(
        vec![
            poi(0, Category::Apartment, 0),
            poi(1, Category::Cafe, 100),
            poi(2, Category::Cafe, 0),
            poi(3, Category::Cafe, 40),
            poi(4, Category::Company, 0),
        ],
        |i, j, _| match (i, j) {
            (0, 1) => 4,
            (1, 4) => 4,
            (0, 2) => 7,
            (2, 4) => 6,
            (0, 3) => 5,
            (3, 4) => 5,
            _ => 20,
        },
        |_, _| 200,
    );
    // Totals: cafe 1 = 4 + 10 + 4 = 18, cafe 2 = 7 + 5 + 6 = 18, cafe 3 = 5 + 7 + 5 = 17.
    let q = QuerySpec::new(PoiId(0), PoiId(4), at(12, 0)).with_categories(&[Category::Cafe]);
    let plan = solve_optimal(&map, &q).unwrap().plan().cloned().unwrap();
    assert_eq!(plan.itinerary.stops, ids(&[0, 3, 4]));
    assert_eq!(plan.total_min, Minutes::whole(17));

    // Without cafe 3, cafes 1 and 2 tie at 18 and the smaller id wins.
    let mut q2 = q.clone();
    q2.brand_preferences.clear();
    let map2 = {
        let mut m = map.clone();
        m.pois[3].popularity = [100; 24];
        m
    };
    let plan = solve_optimal(&map2, &q2).unwrap().plan().cloned().unwrap();
    assert_eq!(plan.itinerary.stops, ids(&[0, 1, 4]));
}

#[test]
fn solver_prefers_absorbed_plan() {
    let map = charge_map(20);
    let q = charge_query();
    let optimal = solve_optimal(&map, &q).unwrap();
    let oracle = brute_force_oracle(&map, &q).unwrap();
    let plan = optimal.plan().unwrap();
    assert_eq!(plan.total_min, Minutes::whole(62));
    assert_eq!(plan.absorptions.len(), 1);
    // Both orders absorb to 62 minutes; the smaller stop sequence wins.
    assert_eq!(plan.itinerary.stops, ids(&[0, 1, 2, 3]));
    assert_eq!(oracle.plan(), optimal.plan());
    assert_eq!(oracle.considered, 2);
}

#[test]
fn closed_candidates_make_the_query_infeasible() {
    let map = errand_map();
    let q = QuerySpec::new(PoiId(0), PoiId(3), at(23, 30)).with_categories(&[Category::Market]);
    for solution in [solve_optimal(&map, &q).unwrap(), brute_force_oracle(&map, &q).unwrap()] {
        assert!(!solution.is_feasible());
        assert_eq!(solution.violations(), &[Violation::ClosedAtArrival { poi: PoiId(2) }]);
    }
    let mut branded = QuerySpec::new(PoiId(0), PoiId(3), at(9, 0)).with_categories(&[Category::Cafe]);
    branded.brand_preferences.insert(Category::Cafe, "Nowhere".into());
    let solution = solve_optimal(&map, &branded).unwrap();
    assert_eq!(solution.considered, 0);
    assert_eq!(
        solution.violations(),
        &[Violation::MissingCategory {
            category: Category::Cafe
        }]
    );
}

#[test]
fn query_validation() {
    let map = errand_map();
    let q = QuerySpec::new(PoiId(0), PoiId(0), at(9, 0));
    assert!(solve_optimal(&map, &q).is_err());
    let q = QuerySpec::new(PoiId(0), PoiId(3), at(9, 0)).with_categories(&[Category::Cafe, Category::Cafe]);
    assert!(solve_optimal(&map, &q).is_err());
    let mut q = QuerySpec::new(PoiId(0), PoiId(3), at(9, 0)).with_categories(&[Category::Charging]);
    let mut excluded = map.clone();
    excluded.exclusions.push(("charging".into(), "cafe".into()));
    q.required_categories.push(Category::Cafe);
    assert!(solve_optimal(&excluded, &q).is_err());
    assert!(solve_optimal(&map, &q).is_ok());
}

#[test]
fn nearest_excludes_origin_and_breaks_ties_by_id() {
    let map = toy(
        vec![
            poi(0, Category::Cafe, 0),
            poi(1, Category::Cafe, 0),
            poi(2, Category::Gym, 0),
        ],
        |_, _, _| 5,
        |_, _| 50,
    );
    assert_eq!(nearest_poi(&map, PoiId(0), Category::Cafe).unwrap(), PoiId(1));
    assert_eq!(nearest_poi(&map, PoiId(1), Category::Cafe).unwrap(), PoiId(0));
    assert_eq!(nearest_poi(&map, PoiId(0), Category::Gym).unwrap(), PoiId(2));
    assert!(nearest_poi(&map, PoiId(2), Category::Gym).is_err());
    assert!(nearest_poi(&map, PoiId(0), Category::Market).is_err());
}

#[test]
fn free_flow_departure_wins_for_pure_drives() {
    let map = toy(
        vec![poi(0, Category::Apartment, 0), poi(1, Category::Company, 0)],
        |_, _, b| if b == Bucket::B00 { 10 } else { 20 },
        |_, _| 200,
    );
    let q = QuerySpec::new(PoiId(0), PoiId(1), at(9, 0));
    let solution = best_departure(&map, &q, &[at(9, 0), at(0, 0)], Engine::BranchAndBound).unwrap();
    assert_eq!(solution.plan().unwrap().departure(), at(0, 0));
    let single = best_departure(&map, &q, &[at(12, 0)], Engine::BranchAndBound).unwrap();
    assert_eq!(single.plan().unwrap().departure(), at(12, 0));
    assert!(best_departure(&map, &q, &[], Engine::BranchAndBound).is_err());
}

#[test]
fn insertion_into_two_stop_plan() {
    let map = toy(
        vec![
            poi(0, Category::Apartment, 0),
            poi(1, Category::Cafe, 0),
            poi(2, Category::Cafe, 0),
            poi(3, Category::Company, 0),
        ],
        |i, j, _| match (i, j) {
            (0, 2) | (2, 3) => 3,
            _ => 9,
        },
        |_, _| 200,
    );
    let base = Itinerary::new(ids(&[0, 3]), at(10, 0));
    let q = QuerySpec::new(PoiId(0), PoiId(3), at(10, 0));
    let insertion = best_insertion(&map, &base, Category::Cafe, &q).unwrap();
    assert_eq!(insertion.considered, 2);
    match insertion.outcome {
        InsertionOutcome::Best { poi, position, plan } => {
            assert_eq!((poi, position), (PoiId(2), 1));
            assert_eq!(plan.total_min, Minutes::whole(3 + 5 + 3));
        }
        other => panic!("unexpected {other:?}"),
    }

    // A cafe already on the route is skipped.
    let base = Itinerary::new(ids(&[0, 2, 3]), at(10, 0));
    let insertion = best_insertion(&map, &base, Category::Cafe, &q).unwrap();
    assert_eq!(insertion.considered, 2);
    assert!(matches!(
        insertion.outcome,
        InsertionOutcome::Best { poi: PoiId(1), .. }
    ));
}

#[test]
fn route_comparison_labels() {
    let map = errand_map();
    let q = QuerySpec::new(PoiId(0), PoiId(3), at(9, 0));
    let a = Itinerary::new(ids(&[0, 1, 3]), at(9, 0));
    let same = compare_routes(&map, &a, &a, &q).unwrap();
    assert_eq!((same.winner, same.tie), (Label::A, true));
    let longer = Itinerary::new(ids(&[0, 1, 2, 3]), at(9, 0));
    let cmp = compare_routes(&map, &longer, &a, &q).unwrap();
    assert_eq!((cmp.winner, cmp.tie), (Label::B, false));
    assert!(cmp.total_a > cmp.total_b);
}
