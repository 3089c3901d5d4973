//! Small benchmark instances shipped with the crate.

use super::{BppInstance, RoutingInstance};

/// Solomon C101, first 25 customers.
pub const C101_25: &str = "\
C101

VEHICLE
NUMBER     CAPACITY
  25         200

CUSTOMER
CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME

         0        40        50         0         0      1236         0
         1        45        68        10       912       967        90
         2        45        70        30       825       870        90
         3        42        66        10        65       146        90
         4        42        68        10       727       782        90
         5        42        65        10        15        67        90
         6        40        69        20       621       702        90
         7        40        66        20       170       225        90
         8        38        68        20       255       324        90
         9        38        70        10       534       605        90
        10        35        66        10       357       410        90
        11        35        69        10       448       505        90
        12        25        85        20       652       721        90
        13        22        75        30        30        92        90
        14        22        85        10       567       620        90
        15        20        80        40       384       429        90
        16        20        85        40       475       528        90
        17        18        75        20        99       148        90
        18        15        75        20       179       254        90
        19        15        80        10       278       345        90
        20        30        50        10        10        73        90
        21        30        52        20       914       965        90
        22        28        52        20       812       883        90
        23        28        55        10       732       777        90
        24        25        50        10        65       144        90
        25        25        52        40       169       224        90
";

/// Solomon R101, first 25 customers.
pub const R101_25: &str = "\
R101

VEHICLE
NUMBER     CAPACITY
  25         200

CUSTOMER
CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME

         0        35        35         0         0       230         0
         1        41        49        10       161       171        10
         2        35        17         7        50        60        10
         3        55        45        13       116       126        10
         4        55        20        19       149       159        10
         5        15        30        26        34        44        10
         6        25        30         3        99       109        10
         7        20        50         5        81        91        10
         8        10        43         9        95       105        10
         9        55        60        16        97       107        10
        10        30        60        16       124       134        10
        11        20        65        12        67        77        10
        12        50        35        19        63        73        10
        13        30        25        23       159       169        10
        14        15        10        20        32        42        10
        15        30         5         8        61        71        10
        16        10        20        19        75        85        10
        17         5        30         2       157       167        10
        18        20        40        12        87        97        10
        19        15        60        17        76        86        10
        20        45        65         9       126       136        10
        21        45        20        11        62        72        10
        22        45        10        18        68        78        10
        23        55         5        29       149       159        10
        24        65        35         3       153       163        10
        25        65        20         6       172       182        10
";

/// Optimal distances of the two routing fixtures in tenths of file units.
/// Cross-checked with an arc-flow MIP; used for regression only.
pub const C101_25_OPTIMUM: f64 = 1913.0;
pub const R101_25_OPTIMUM: f64 = 6206.0;

/// Seed of the uniform 120-item bin packing fixture.
pub const U120_SEED: u64 = 120;

pub fn c101_25() -> RoutingInstance {
    RoutingInstance::parse_solomon(C101_25, None).expect("fixture parses")
}

pub fn r101_25() -> RoutingInstance {
    RoutingInstance::parse_solomon(R101_25, None).expect("fixture parses")
}

/// 120 items with weights uniform in [20, 100] and capacity 150.
pub fn u120() -> BppInstance {
    BppInstance::falkenauer_uniform(120, U120_SEED)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse_with_25_customers() {
        for inst in [c101_25(), r101_25()] {
            assert_eq!(inst.customers(), 25);
            assert_eq!(inst.vehicles, 25);
            assert_eq!(inst.capacity, 200.0);
        }
        let bpp = u120();
        assert_eq!(bpp.len(), 120);
        assert!(bpp.weights.iter().all(|w| (20.0..=100.0).contains(w)));
    }
}
