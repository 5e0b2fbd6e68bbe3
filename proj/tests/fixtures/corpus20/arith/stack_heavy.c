#include <stdio.h>

/* Many scalar locals: every one is a stack slot before promotion. */
int mix(int a, int b, int c) {
  int x = a + b;
  int y = b * c;
  int z = x - y;
  int w = z * 3;
  int u = w + a;
  int v = u ^ b;
  int t = v + c;
  int s = t * 2;
  int r = s - x;
  int q = r + y;
  return q + z + w;
}

int main(void) {
  int acc = 0;
  int i = 0;
  int limit = 12;
  while (i < limit) {
    acc += mix(i, i + 1, i + 2);
    i++;
  }
  printf("%d\n", acc);
  return 0;
}
