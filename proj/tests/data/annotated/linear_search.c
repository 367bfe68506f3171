/*@ predicate found{L}(int *a, integer n, int v) =
      \exists integer i; 0 <= i < n && a[i] == v;
*/

/*@ requires n >= 0 && \valid_read(a + (0 .. n - 1));
    assigns \nothing;
    behavior present:
      assumes found(a, n, v);
      ensures 0 <= \result < n && a[\result] == v;
    behavior absent:
      assumes !found(a, n, v);
      ensures \result == -1;
    complete behaviors present, absent;
    disjoint behaviors present, absent;
*/
int linear_search(int *a, int n, int v) {
  /*@ loop invariant 0 <= i <= n;
      loop invariant \forall integer k; 0 <= k < i ==> a[k] != v;
      loop assigns i;
      loop variant n - i;
  */
  for (int i = 0; i < n; i++) {
    if (a[i] == v)
      return i;
  }
  return -1;
}
