//! The example models shipped with the crate.

pub const SUBMIT_ORDER: &str = include_str!("../../../fixtures/submit-order.tm");
pub const TELEPHONE: &str = include_str!("../../../fixtures/telephone.tm");
pub const ORDER_MAKING: &str = include_str!("../../../fixtures/order-making.tm");
pub const SHIPMENT: &str = include_str!("../../../fixtures/shipment.tm");

/// `(file stem, source)` for every fixture.
pub const ALL: [(&str, &str); 4] =
    [("submit-order", SUBMIT_ORDER), ("telephone", TELEPHONE), ("order-making", ORDER_MAKING), ("shipment", SHIPMENT)];
