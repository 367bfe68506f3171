/*@ requires x >= 0 && x <= 1000;
    assigns \nothing;
    ensures \result == 2 * x;
*/
int twice(int x) {
  return x + x;
}

/*@ requires x >= 0 && x <= 1000;
    assigns \nothing;
    ensures \result == 4 * x;
*/
int four_times(int x) {
  int t = twice(x);
  return twice(t);
}

int main(void) {
  return four_times(3) - 12;
}
