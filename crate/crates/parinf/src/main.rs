fn main() {
    println!("parinf");
}
