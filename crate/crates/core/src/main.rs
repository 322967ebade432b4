//! Binary entry point; all logic lives in the library's `cli` module.

fn main() {
    std::process::exit(ando_lab_core::cli::run());
}
