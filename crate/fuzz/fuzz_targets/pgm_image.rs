#![no_main]
use libfuzzer_sys::fuzz_target;
use sparse_pca::data::{decode_pgm, encode_pgm};

fuzz_target!(|data: &[u8]| {
    if let Ok(image) = decode_pgm(data, "fuzz") {
        assert_eq!(image.pixels.len(), image.width * image.height);
        let again = decode_pgm(&encode_pgm(&image), "fuzz").expect("own output decodes");
        assert_eq!(image, again);
        let _ = image.to_features();
    }
});
