/*@ predicate even(integer n) = n % 2 == 0;
*/

/*@ assigns \nothing;
    ensures \result == 1 <==> even(n);
*/
int is_even(int n) {
  return n % 2 == 0;
}
