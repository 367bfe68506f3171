/*@ requires bound: 0 <= n <= 1000;
    assigns \nothing;
    ensures result_value: \result == n + 1;
*/
int succ(int n) {
  int r = n;
  /*@ loop invariant progress: r <= n + 1;
      loop assigns r;
      loop variant n + 1 - r;
  */
  while (r < n + 1) {
    r++;
  }
  return r;
}
