"""
Ultralap GUI

Version: 1.0

Description:
    Entry point of the desktop front-end. Without arguments it opens a Tkinter
    window with one panel per task (validate, spectrum, heat kernel, sampling,
    boundary value problems); with arguments it runs the command line instead.

Usage:
    python app/main.py
    python app/main.py spectrum --config configs/tate.json
"""

import os
import sys
import tkinter as tk
from tkinter import Label, Frame, PhotoImage

from gui_components.task_selector import TaskSelector
from gui_components.task_runner import TaskRunnerUI


class UltralapApp:
    """
    Main window: header, the active task panel and the task selector.
    """
    def __init__(self, root):
        """
        Args:
            root (tk.Tk): The root Tkinter window.
        """
        self.root = root
        self.root.title("Ultralap")
        self.root.geometry("800x850")
        self.root.configure(bg="#e6f0fa")

        self.set_window_icon()

        self.header = Label(
            root,
            text="Ultrametric Laplacians on Mumford Curves",
            font=("Helvetica", 20, "bold"),
            background="#e6f0fa",
            foreground="#0a3d62"
        )
        self.header.pack(pady=20)

        self.main_frame = Frame(root, background="#e6f0fa")
        self.main_frame.pack(fill="both", expand=True, padx=20, pady=10)

        self.task_selector = TaskSelector(self.root, self.select_task)
        self.task_selector.pack(pady=10)

        self.active_task_frame = None

    def set_window_icon(self):
        """Uses assets/logo.png when present (also inside a PyInstaller bundle)."""
        try:
            base_path = getattr(sys, "_MEIPASS", os.path.abspath("."))
            icon_img = PhotoImage(file=os.path.join(base_path, "assets", "logo.png"))
            self.root.iconphoto(True, icon_img)
        except Exception as e:
            print(f"⚠️ Could not set icon: {e}")

    def select_task(self, task):
        """
        Args:
            task (str): One of validate, spectrum, heat, kernel, sample, bvp.
        """
        if self.active_task_frame:
            self.active_task_frame.destroy()
        self.active_task_frame = TaskRunnerUI(self.main_frame, task)
        self.active_task_frame.pack(fill="both", expand=True)


def run_gui():
    root = tk.Tk()
    UltralapApp(root)
    root.mainloop()


if __name__ == "__main__":
    if len(sys.argv) > 1:
        from cli import main
        sys.exit(main())
    run_gui()
