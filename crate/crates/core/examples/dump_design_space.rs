fn main() {
    let doc = motioncomic_core::design_space::design_space_document();
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}
