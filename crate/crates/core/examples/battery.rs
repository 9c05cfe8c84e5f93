use semistab::verify::{run_battery, VerifyOptions};

fn main() {
    let only = std::env::args().nth(1);
    for r in run_battery(&VerifyOptions { only, ..Default::default() }) {
        println!("{}", r.line());
    }
}
