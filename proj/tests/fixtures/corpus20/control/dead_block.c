#include <stdio.h>

int f(int x) {
  int y = 0;
  if (x > 0) {
    y = 1;
  } else {
    y = 1;
  }
  do {
    y += x;
  } while (0);
  goto done;
done:
  return y;
}

int main(void) {
  printf("%d\n", f(3));
  return 0;
}
