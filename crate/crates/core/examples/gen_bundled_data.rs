//! Regenerates the synthetic CSV files bundled under data/. The outputs are
//! committed; rerun this only when the generators or specs change:
//!
//!     cargo run -p amsd-core --example gen_bundled_data -- data/

use amsd_core::data::write_csv;
use amsd_core::eval::synth::{
    gaussian_mixture, skewed_family, GaussianMixtureSpec, SkewedFamilySpec,
};
use std::fs::File;
use std::path::Path;

fn main() {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "data".to_string());
    let out_dir = Path::new(&out_dir);

    let gauss = gaussian_mixture(&GaussianMixtureSpec {
        rows: 300,
        attrs: 4,
        classes: 3,
        separation: 2.0,
        seed: 20260814,
    });
    let path = out_dir.join("gauss300.csv");
    write_csv(&gauss, File::create(&path).expect("create gauss300.csv")).unwrap();
    println!("wrote {}", path.display());

    let skewed = skewed_family(&SkewedFamilySpec {
        rows: 400,
        noise_attrs: 3,
        boundary: 0.5,
        label_noise: 0.1,
        seed: 20260814,
    });
    let path = out_dir.join("skewed400.csv");
    write_csv(&skewed, File::create(&path).expect("create skewed400.csv")).unwrap();
    println!("wrote {}", path.display());
}
