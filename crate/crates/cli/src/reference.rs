//! Published values the `reproduce` targets are compared against.

/// Skewness values of the coverage tables.
pub const COVERAGE_LAMBDAS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

/// Coverage of 95% intervals for the skew-logistic model: for each sample
/// size, rows mu, sigma, lambda and one column per `COVERAGE_LAMBDAS` entry.
pub const COVERAGE: [(usize, [[f64; 5]; 3]); 4] = [
    (
        10,
        [
            [0.993, 0.970, 0.934, 0.906, 0.914],
            [0.933, 0.965, 0.978, 0.947, 0.936],
            [0.999, 0.985, 0.965, 0.950, 0.953],
        ],
    ),
    (
        30,
        [
            [0.956, 0.948, 0.930, 0.909, 0.920],
            [0.943, 0.968, 0.958, 0.930, 0.947],
            [0.961, 0.959, 0.934, 0.932, 0.965],
        ],
    ),
    (
        100,
        [
            [0.965, 0.952, 0.937, 0.920, 0.934],
            [0.956, 0.981, 0.947, 0.938, 0.954],
            [0.966, 0.960, 0.934, 0.918, 0.932],
        ],
    ),
    (
        1000,
        [
            [0.958, 0.946, 0.943, 0.947, 0.946],
            [0.956, 0.946, 0.931, 0.953, 0.931],
            [0.952, 0.950, 0.938, 0.944, 0.949],
        ],
    ),
];

pub fn coverage(n: usize, lambda0: f64) -> Option<[f64; 3]> {
    let col = COVERAGE_LAMBDAS.iter().position(|&l| l == lambda0)?;
    let (_, rows) = COVERAGE.iter().find(|(m, _)| *m == n)?;
    Some([rows[0][col], rows[1][col], rows[2][col]])
}

pub const BLISS_LINKS: [&str; 4] = ["logit", "probit", "skew-logistic", "skew-normal"];

/// Predicted deaths per dose, in `BLISS_LINKS` order.
pub const BLISS_PREDICTED: [[f64; 8]; 4] = [
    [3.5, 9.9, 22.5, 33.9, 50.0, 53.2, 59.2, 58.7],
    [3.5, 10.8, 23.5, 33.8, 49.6, 53.3, 59.6, 59.2],
    [4.9, 10.6, 20.9, 31.2, 48.7, 54.2, 60.5, 59.6],
    [5.4, 11.6, 21.6, 30.6, 47.5, 53.9, 60.9, 59.8],
];

/// `(AIC, BIC, Bayes factor against skew-logistic)` in `BLISS_LINKS` order.
pub const BLISS_COMPARISON: [(f64, f64, f64); 4] = [
    (376.50, 376.63, 0.12),
    (375.36, 375.52, 0.20),
    (370.75, 371.00, 1.0),
    (371.04, 371.28, 0.92),
];

pub fn bliss_index(link: &str) -> Option<usize> {
    BLISS_LINKS.iter().position(|&l| l == link)
}

pub struct MelanomaRow {
    pub model: &'static str,
    pub aic: f64,
    pub bic: f64,
    pub bayes_factor: f64,
    /// 95% interval for theta.
    pub interval: (f64, f64),
}

/// Melanoma lesion-score differences.
pub const MELANOMA: [MelanomaRow; 2] = [
    MelanomaRow {
        model: "skew-logistic",
        aic: 176.17,
        bic: 181.96,
        bayes_factor: 1.0,
        interval: (0.54, 0.76),
    },
    MelanomaRow {
        model: "skew-normal",
        aic: 175.01,
        bic: 180.80,
        bayes_factor: 1.5,
        interval: (0.52, 0.74),
    },
];
