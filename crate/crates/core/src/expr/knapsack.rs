//! Dantzig upper bound for the 0-1 knapsack problem.

/// Returns the LP-relaxation (Dantzig) bound of a 0-1 knapsack over `items`,
/// given as `(profit, weight)` pairs.
///
/// Items with nonpositive profit are dropped. Zero-weight items with positive
/// profit are always packed. The rest are packed greedily by descending
/// `profit / weight` (ties by position), with the first item that does not
/// fit taken fractionally. A negative capacity yields `0`.
pub fn dantzig_bound(items: &[(f64, f64)], capacity: f64) -> f64 {
    if capacity < 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut candidates: Vec<(f64, f64, usize)> = Vec::with_capacity(items.len());
    for (idx, &(profit, weight)) in items.iter().enumerate() {
        if profit <= 0.0 {
            continue;
        }
        if weight <= 0.0 {
            total += profit;
        } else {
            candidates.push((profit, weight, idx));
        }
    }
    if candidates.is_empty() || capacity == 0.0 {
        return total;
    }
    // a/b > c/d  <=>  a*d > c*b for positive weights
    candidates.sort_unstable_by(|x, y| {
        (y.0 * x.1)
            .partial_cmp(&(x.0 * y.1))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.2.cmp(&y.2))
    });
    let mut remaining = capacity;
    for (profit, weight, _) in candidates {
        if weight <= remaining {
            total += profit;
            remaining -= weight;
        } else {
            total += profit / weight * remaining;
            break;
        }
    }
    total
}
