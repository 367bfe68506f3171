/*@ predicate is_min(int *a, integer n, int m) =
      (\forall integer i; 0 <= i < n ==> m <= a[i]) &&
      (\exists integer i; 0 <= i < n && a[i] == m);
*/

/*@ requires n > 0 && \valid_read(a + (0 .. n - 1));
    assigns \nothing;
    ensures is_min(a, n, \result);
*/
int min_array(int *a, int n) {
  int m = a[0];
  /*@ loop invariant 1 <= i <= n;
      loop invariant is_min(a, i, m);
      loop assigns i, m;
      loop variant n - i;
  */
  for (int i = 1; i < n; i++) {
    if (a[i] < m)
      m = a[i];
  }
  return m;
}
