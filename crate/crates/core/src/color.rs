//! Logo-style color numbers: a real in `[0, 140)`, fourteen hue families of
//! ten shades each. Base shades sit at `10k + 5`.

pub const BLACK: f64 = 0.0;
pub const GRAY: f64 = 5.0;
pub const WHITE: f64 = 9.9;
pub const RED: f64 = 15.0;
pub const ORANGE: f64 = 25.0;
pub const BROWN: f64 = 35.0;
pub const YELLOW: f64 = 45.0;
pub const GREEN: f64 = 55.0;
pub const LIME: f64 = 65.0;
pub const TURQUOISE: f64 = 75.0;
pub const CYAN: f64 = 85.0;
pub const SKY: f64 = 95.0;
pub const BLUE: f64 = 105.0;
pub const VIOLET: f64 = 115.0;
pub const MAGENTA: f64 = 125.0;
pub const PINK: f64 = 135.0;

pub const NAMED: &[(&str, f64)] = &[
    ("black", BLACK),
    ("gray", GRAY),
    ("grey", GRAY),
    ("white", WHITE),
    ("red", RED),
    ("orange", ORANGE),
    ("brown", BROWN),
    ("yellow", YELLOW),
    ("green", GREEN),
    ("lime", LIME),
    ("turquoise", TURQUOISE),
    ("cyan", CYAN),
    ("sky", SKY),
    ("blue", BLUE),
    ("violet", VIOLET),
    ("magenta", MAGENTA),
    ("pink", PINK),
];

/// Distinct hues handed out to towers and cluster heads, in order.
/// Gray is left out so it can mark undecided or free agents.
pub const DISTINCT: &[f64] = &[
    RED, BLUE, GREEN, YELLOW, VIOLET, ORANGE, CYAN, MAGENTA, LIME, BROWN, SKY, PINK, TURQUOISE,
];

pub fn by_name(name: &str) -> Option<f64> {
    NAMED.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

/// Folds any real onto the color circle `[0, 140)`.
pub fn wrap(c: f64) -> f64 {
    let r = c.rem_euclid(140.0);
    if r >= 140.0 || !r.is_finite() {
        0.0
    } else {
        r
    }
}
