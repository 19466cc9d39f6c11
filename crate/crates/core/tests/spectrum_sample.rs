mod common;

use midband::spectrum::{load_allocations, union, Band, Proposer, Region, Service, Status};
use std::collections::BTreeSet;

const G: u64 = 1_000_000;

#[test]
fn region_2_service_totals() {
    let reg = load_allocations(&common::data("allocations_sample.json")).unwrap();
    let r2 = Region::ItuR2;
    let p = Status::Primary;
    let cases = [
        (Service::Ms, 11_305, None),
        (Service::Fs, 9_230, None),
        (Service::Fss, 7_400, None),
        (Service::Rls, 4_750, None),
        (Service::Sr, 5_635, Some(14)),
        (Service::Eess, 5_065, Some(15)),
    ];
    for (svc, mhz, count) in cases {
        assert_eq!(reg.total_allocated_hz(&svc, r2, p), mhz * G, "{svc}");
        if let Some(n) = count {
            assert_eq!(reg.band_count(&svc, r2, p), n, "{svc}");
        }
    }
}

#[test]
fn candidate_bands_of_the_study() {
    let reg = load_allocations(&common::data("allocations_sample.json")).unwrap();
    let got = reg
        .candidate_intersection(&BTreeSet::from([Proposer::Paper]))
        .unwrap();
    let want = vec![
        Band::new(7_125 * G, 8_500 * G).unwrap(),
        Band::new(10_000 * G, 10_500 * G).unwrap(),
        Band::new(12_200 * G, 13_250 * G).unwrap(),
        Band::new(18_800 * G, 20_200 * G).unwrap(),
    ];
    assert_eq!(got, want);
}

#[test]
fn candidate_overlaps_and_union_consistency() {
    let reg = load_allocations(&common::data("allocations_sample.json")).unwrap();
    let lower = reg.services_at(Band::new(7_125 * G, 8_500 * G).unwrap());
    for svc in [
        Service::Fs,
        Service::Fss,
        Service::Eess,
        Service::Sr,
        Service::Ms,
    ] {
        assert!(lower.iter().any(|(s, _, _)| *s == svc), "{svc} missing");
    }
    let ku = reg.services_at(Band::new(12_200 * G, 13_250 * G).unwrap());
    assert!(ku.contains(&(Service::Other("DBS".into()), Region::ItuR2, Status::Primary)));
    assert!(ku.contains(&(Service::Other("MVDDS".into()), Region::Fcc, Status::Primary)));
    // every record lies in the sanity range and the union never exceeds the sum
    let all: Vec<Band> = reg.records().iter().map(|r| r.band).collect();
    let sum: u64 = all.iter().map(Band::width_hz).sum();
    let u: u64 = union(all).iter().map(Band::width_hz).sum();
    assert!(u <= sum);
}
