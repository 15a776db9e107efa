//! Bundled invariant scenarios.

pub const TAGS: [&str; 4] = ["gauge", "reconstruction", "residual", "limit"];

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenarios/", $name, ".json")))),*
        ];
    };
}

bundled!(
    "gauge_invariance_1d",
    "ordinary_gauge_dependence_1d",
    "linear_shift_kernel_1d",
    "trace_kernel_1d",
    "gauge_invariance_optical_mixed_1d",
    "gauge_invariance_2d_magnetic",
    "reconstruction_1d",
    "residual_free_1d",
    "residual_uniform_e_1d",
    "residual_harmonic_1d",
    "residual_constant_b_2d",
    "classical_limit_quadratic",
    "classical_limit_quartic",
);

/// `None` for an unknown tag; `all` matches every scenario.
pub fn select(tag: &str) -> Option<Vec<(&'static str, &'static str)>> {
    if tag != "all" && !TAGS.contains(&tag) {
        return None;
    }
    Some(
        BUNDLED
            .iter()
            .filter(|(_, text)| tag == "all" || tags_of(text).iter().any(|t| t == tag))
            .copied()
            .collect(),
    )
}

pub fn tags_of(text: &str) -> Vec<String> {
    crate::config::parse(text).map(|c| c.tags).unwrap_or_default()
}
