/*@ axiomatic Count {
      logic integer count(int *a, integer n, int v) reads a[0 .. n - 1];
      axiom count_nil: \forall int *a, int v; count(a, 0, v) == 0;
      axiom count_hit: \forall int *a, integer n, int v;
        n > 0 && a[n - 1] == v ==> count(a, n, v) == count(a, n - 1, v) + 1;
      axiom count_miss: \forall int *a, integer n, int v;
        n > 0 && a[n - 1] != v ==> count(a, n, v) == count(a, n - 1, v);
    }
*/

/*@ requires n >= 0 && \valid_read(a + (0 .. n - 1));
    assigns \nothing;
    ensures \result == count(a, n, v);
*/
int count_occ(int *a, int n, int v) {
  int c = 0;
  /*@ loop invariant 0 <= i <= n;
      loop invariant 0 <= c <= i;
      loop invariant c == count(a, i, v);
      loop assigns i, c;
      loop variant n - i;
  */
  for (int i = 0; i < n; i++) {
    if (a[i] == v)
      c++;
  }
  return c;
}
