fn main() {
    println!("{}", serde_json::to_string_pretty(&motioncomic_service::openapi::document()).expect("openapi serializes"));
}
