//! Nine-peer worked example: two queries replayed against hand-set tables.

mod common;

use common::*;

#[test]
fn baby_walks_through_c_and_e() {
    let mut sim = fixture_sim();
    let (before, after) = run_query(&mut sim, BABY);
    assert_eq!(path(&sim, 0), "ACEI");
    assert_eq!(changed(&before, &after), set(&["A.QQ", "C.NQ", "C.QQ", "E.PQ"]));

    let e = id('E');
    let (i, c) = (id('I'), id('C'));
    assert!(after[e.index()].1.get(i).unwrap() > before[e.index()].1.get(i).unwrap());
    assert!(after[c.index()].0.get(e).unwrap() > before[c.index()].0.get(e).unwrap());
    let a = id('A');
    assert!(after[a.index()].2[&BABY].get(c).unwrap() > before[a.index()].2[&BABY].get(c).unwrap());
    assert!(after[c.index()].2.contains_key(&BABY));
}

#[test]
fn hello_goes_straight_to_power_peers() {
    let mut sim = fixture_sim();
    let (before, after) = run_query(&mut sim, HELLO);
    assert_eq!(path(&sim, 0), "AEI");
    assert_eq!(changed(&before, &after), set(&["A.PQ", "E.PQ"]));
    let (a, e, i) = (id('A'), id('E'), id('I'));
    assert!(after[a.index()].1.get(e).unwrap() > before[a.index()].1.get(e).unwrap());
    assert!(after[e.index()].1.get(i).unwrap() > before[e.index()].1.get(i).unwrap());
}

#[test]
fn queries_in_sequence() {
    let mut sim = fixture_sim();
    let (first, _) = run_query(&mut sim, BABY);
    let (_, last) = run_query(&mut sim, HELLO);
    assert_eq!(path(&sim, 0), "ACEI");
    assert_eq!(path(&sim, 1), "AEI");
    let (e, i) = (id('E'), id('I'));
    assert!(last[e.index()].1.get(i).unwrap() > first[e.index()].1.get(i).unwrap());
}
