use cqcap::channel::{CqChannel, Prior};
use cqcap::exponents::*;
use std::time::Instant;

fn main() {
    let ch = CqChannel::binary_pure(0.5).unwrap();
    let opts = ExponentOpts::default();
    let t = Instant::now();
    let _ = mu(&ch, &Prior::uniform(2), 0.7).unwrap();
    println!("single mu: {:?}", t.elapsed());
    let t = Instant::now();
    let pt = random_coding_exponent(&ch, 0.4, &opts).unwrap();
    println!("E_r point: {:?} (value {})", t.elapsed(), pt.value);
    let t = Instant::now();
    let pt = expurgated_exponent(&ch, 0.4, &opts).unwrap();
    println!("E_ex point: {:?} (value {})", t.elapsed(), pt.value);
}
