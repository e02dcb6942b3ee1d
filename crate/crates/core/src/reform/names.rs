//! Deterministic names for generated variables and rows.

pub fn lam(k: &str, j: usize) -> String {
    format!("lam_{j}_{k}")
}

pub fn xhat(v: &str, j: usize, k: &str) -> String {
    format!("xhat_{v}_{j}_{k}")
}

pub fn nu_t(v: &str, j: usize, k: &str) -> String {
    format!("nu_t_{v}_{j}_{k}")
}

pub fn nu_f(v: &str, j: usize, k: &str) -> String {
    format!("nu_f_{v}_{j}_{k}")
}

/// Hull copy.
pub fn nu(v: &str, j: usize, k: &str) -> String {
    format!("nu_{v}_{j}_{k}")
}

pub fn row_hat(k: &str, v: &str, j: usize) -> String {
    format!("{k}_hat_{v}_{j}")
}

pub fn row_box_t(k: &str, v: &str, j: usize) -> String {
    format!("{k}_boxt_{v}_{j}")
}

pub fn row_box_f(k: &str, v: &str, j: usize) -> String {
    format!("{k}_boxf_{v}_{j}")
}

pub fn row_box(k: &str, v: &str, j: usize) -> String {
    format!("{k}_box_{v}_{j}")
}

pub fn row_link(k: &str, v: &str) -> String {
    format!("{k}_link_{v}")
}

pub fn row_one(k: &str) -> String {
    format!("{k}_one")
}

pub fn row_clause(i: usize) -> String {
    format!("clause_{i}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_follow_term_then_disjunction_order() {
        assert_eq!(lam("k1", 2), "lam_2_k1");
        assert_eq!(xhat("E", 1, "k1"), "xhat_E_1_k1");
        assert_eq!(nu_t("PC", 3, "k2"), "nu_t_PC_3_k2");
        assert_eq!(nu("x", 1, "k4"), "nu_x_1_k4");
    }
}
