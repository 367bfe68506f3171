/*@ axiomatic Positive {
      predicate all_pos{L}(int *a, integer n);
      axiom all_pos_empty{L}: \forall int *a; all_pos(a, 0);
      axiom all_pos_next{L}:
        \forall int *a, integer n; n > 0 ==> (all_pos(a, n) <==> all_pos(a, n - 1) && a[n - 1] > 0);
    }
*/

/*@ requires n >= 0 && \valid_read(a + (0 .. n - 1));
    assigns \nothing;
    ensures \result == 1 <==> all_pos(a, n);
*/
int all_positive(int *a, int n) {
  /*@ loop invariant 0 <= i <= n;
      loop invariant all_pos(a, i);
      loop assigns i;
      loop variant n - i;
  */
  for (int i = 0; i < n; i++)
    if (a[i] <= 0)
      return 0;
  return 1;
}
