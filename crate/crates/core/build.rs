fn main() {
    // ndarray-linalg is built without a bundled backend; LAPACK/BLAS symbols
    // come from the system OpenBLAS.
    println!("cargo:rustc-link-lib=openblas");
}
