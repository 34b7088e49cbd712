//! Four-point function of the interacting model: sign flips under exchange of
//! two arguments, vanishing without a chirality-matching pairing, and the
//! free-field determinant at zero coupling.

use thirring_lab::thirring::{Chirality, Insertion, Normalization, Point, ThirringCorrelator, ThirringParams};

fn ins(x0: f64, x1: f64, c: Chirality) -> Insertion {
    Insertion::new(Point::new(x0, x1), c)
}

fn main() -> thirring_lab::Result<()> {
    use Chirality::{Minus, Plus};
    let xs = [ins(0.3, -0.2, Plus), ins(1.1, 0.7, Minus)];
    let ys = [ins(-0.5, 0.4, Minus), ins(0.9, -0.8, Plus)];

    let corr = ThirringCorrelator::new(ThirringParams::new(0.2, 0.5)?, Normalization::default())?;
    let v = corr.n_point(&xs, &ys)?;
    let swapped = corr.n_point(&[xs[1], xs[0]], &ys)?;
    println!("lambda = 0.2: S = {v:.6e}");
    println!("  x1 <-> x2:   {swapped:.6e}");
    let same = [ins(0.3, -0.2, Plus), ins(1.1, 0.7, Plus)];
    println!("  all psi chiralities +: {}", corr.n_point(&same, &ys)?);

    let free = ThirringCorrelator::free();
    println!(
        "lambda = 0: S = {:.12e}, Wick determinant {:.12e}",
        free.n_point(&xs, &ys)?,
        free.wick_determinant(&xs, &ys)?
    );
    Ok(())
}
