//! Worked examples on the bundled fixtures.

use std::collections::BTreeSet;

use tmlang::{
    branch_groups, check_events, compare_behavior, derive_behavior, fixtures, machine_reachability, parse, print,
    validate_model, BehaviorEdge, BehaviorGraph, Code, MachineId, Severity, TmModel,
};

fn model(src: &str) -> TmModel {
    parse(src).unwrap()
}

fn codes(d: &[tmlang::Diagnostic]) -> Vec<&str> {
    d.iter().map(|d| d.code.as_str()).collect()
}

#[test]
fn fixtures_are_clean() {
    for (name, src) in fixtures::ALL {
        let m = model(src);
        assert_eq!(validate_model(&m), [], "{name}");
        assert_eq!(check_events(&m), [], "{name}");
    }
}

#[test]
fn branch_groups_of_the_fixtures() {
    let groups = |src: &str| -> Vec<(String, Vec<String>)> {
        let m = model(src);
        branch_groups(&m).iter().map(|g| (g.src.to_string(), g.labels().map(str::to_owned).collect())).collect()
    };
    let pair = |n: &str, a: &str, b: &str| (n.to_owned(), vec![a.to_owned(), b.to_owned()]);
    assert_eq!(
        groups(fixtures::ORDER_MAKING),
        [
            pair("Management.process_order", "OK", "not-OK"),
            pair("Management.process_payment", "OK", "not-OK"),
            pair("Management.process_reply", "available", "unavailable"),
        ]
    );
    assert_eq!(groups(fixtures::TELEPHONE), [pair("OtherSide.create_ringing", "response", "silence")]);
    assert_eq!(groups(fixtures::SUBMIT_ORDER), []);
}

#[test]
fn machine_reachability_examples() {
    let has = |src: &str, a: &str, b: &str| {
        machine_reachability(&model(src)).contains(&(MachineId::from(a), MachineId::from(b)))
    };
    assert!(has(fixtures::SUBMIT_ORDER, "Customer", "Company"));
    assert!(has(fixtures::SUBMIT_ORDER, "Company", "Customer"));
    assert!(has(fixtures::ORDER_MAKING, "Supplier", "Production"));
    assert!(has(fixtures::ORDER_MAKING, "Production", "Inventory"));

    let single = model("model m { machine M { create x; process x; } flow M.create_x -> M.process_x; }");
    assert!(machine_reachability(&single).iter().all(|(a, b)| a == b));
}

#[test]
fn release_bypass_on_order_making() {
    let mut b = model(fixtures::ORDER_MAKING).into_builder();
    b.flow("Customer.Order.create_order", "Customer.transfer_order", None).unwrap();
    let d = validate_model(&b.build().unwrap());
    let r3: Vec<_> = d.iter().filter(|d| d.code == Code::R3).collect();
    assert_eq!(r3.len(), 1, "{d:?}");
    assert_eq!(r3[0].ids, ["Customer.Order.create_order", "Customer.transfer_order"]);
    // create -> transfer also skips a stage inside Customer
    assert_eq!(codes(&d), ["R1", "R3"]);
}

#[test]
fn process_into_receive_is_r1() {
    let m = model("model m { machine M { receive x; process x; } flow M.process_x -> M.receive_x; }");
    assert_eq!(codes(&validate_model(&m)), ["R1"]);
}

#[test]
fn order_making_shape() {
    let m = model(fixtures::ORDER_MAKING);
    assert_eq!(m.events().len(), 16);
    assert_eq!(print(&m).matches("behavior {").count(), 1);
    let top: Vec<&str> = m.top_level_machines().map(|m| m.name.as_str()).collect();
    assert_eq!(top, ["Customer", "Management", "Inventory", "Supplier", "Production"]);
}

#[test]
fn telephone_has_seven_events() {
    let m = model(fixtures::TELEPHONE);
    assert_eq!(m.events().len(), 7);
}

#[test]
fn declared_behavior_agrees_with_derived() {
    for src in [fixtures::TELEPHONE, fixtures::SHIPMENT] {
        let m = model(src);
        assert_eq!(compare_behavior(&derive_behavior(&m), m.declared_behavior().unwrap()), []);
    }
    let m = model(fixtures::ORDER_MAKING);
    let d = compare_behavior(&derive_behavior(&m), m.declared_behavior().unwrap());
    assert_eq!(d.len(), 1);
    assert_eq!(
        (d[0].severity, d[0].ids.as_slice()),
        (Severity::Warning, ["E16".to_owned(), "E7".to_owned()].as_slice())
    );
}

#[test]
fn declared_edge_errors_and_missing_edge_warnings() {
    let m = model(fixtures::TELEPHONE);
    let derived = derive_behavior(&m);
    let mut extra: Vec<BehaviorEdge> = derived.edges.clone();
    extra.push(BehaviorEdge::new("E3", "E1"));
    let with_extra = BehaviorGraph::new(derived.nodes.clone(), extra).unwrap();
    let d = compare_behavior(&derived, &with_extra);
    assert_eq!((d.len(), d[0].code), (1, Code::BehaviorNotDerivable));

    let missing = BehaviorGraph::new(derived.nodes.clone(), derived.edges[1..].to_vec()).unwrap();
    let d = compare_behavior(&derived, &missing);
    assert_eq!((d.len(), d[0].severity), (1, Severity::Warning));
}

#[test]
fn shipment_has_alarm_triggers_and_full_coverage() {
    let m = model(fixtures::SHIPMENT);
    let covered: BTreeSet<&str> = m.events().iter().flat_map(|e| e.region_nodes.iter().map(|n| n.as_str())).collect();
    assert_eq!(covered.len(), m.nodes().len());
    assert!(m.trigger_arcs().iter().any(|a| a.dst == "Manufacturer.FillingStation.FillUnit.Sensor.create_leak_alarm"));
}
