/*@ axiomatic Power {
      logic integer pow(integer b, integer e);
      axiom pow_zero: \forall integer b; pow(b, 0) == 1;
      axiom pow_succ: \forall integer b, e; e > 0 ==> pow(b, e) == b * pow(b, e - 1);
    }
*/

/*@ requires 0 <= e <= 10;
    requires 0 <= b <= 8;
    assigns \nothing;
    ensures \result == pow(b, e);
*/
int power(int b, int e) {
  int r = 1;
  /*@ loop invariant 0 <= k <= e;
      loop invariant r == pow(b, k);
      loop assigns k, r;
      loop variant e - k;
  */
  for (int k = 0; k < e; ++k)
    r *= b;
  return r;
}
