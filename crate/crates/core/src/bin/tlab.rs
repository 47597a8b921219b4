fn main() {
    println!("tlab: placeholder");
}
